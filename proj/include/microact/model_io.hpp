#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "microact/pipeline.hpp"

namespace microact {

namespace detail {

inline std::uint32_t crc32(const std::string& data) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xffffffffu;
    for (const unsigned char byte : data) crc = table[(crc ^ byte) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

struct Writer {
    std::string buf;

    void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void str(const std::string& s) {
        u64(s.size());
        buf += s;
    }
    void vec(const std::vector<double>& v) {
        u64(v.size());
        for (const double x : v) f64(x);
    }
    void mat(const Matrix& m) {
        i64(m.rows());
        i64(m.cols());
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
    void dense(const Vector& v) {
        i64(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
    }
};

struct Reader {
    const std::string& buf;
    std::size_t at = 0;

    void need(std::size_t n) const {
        if (at + n > buf.size()) throw IoError("model file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[at++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at++])) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        const auto n = u64();
        need(n);
        std::string s = buf.substr(at, n);
        at += n;
        return s;
    }
    std::vector<double> vec() {
        std::vector<double> v(u64());
        for (auto& x : v) x = f64();
        return v;
    }
    Matrix mat() {
        const auto rows = i64(), cols = i64();
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
        return m;
    }
    Vector dense() {
        Vector v(i64());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
        return v;
    }
};

inline std::string schema_canonical(const AttributeSchema& schema) {
    std::string s;
    for (const auto& a : schema.attributes)
        s += a.name + "|" + (a.kind == AttributeKind::binary ? "b" : "o") + "|" +
             std::to_string(a.levels) + ";";
    return s;
}

inline std::uint64_t schema_hash(const AttributeSchema& schema) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : schema_canonical(schema)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline void write_forest(Writer& w, const RandomForest& forest) {
    w.u64(static_cast<std::uint64_t>(forest.spec.n_trees));
    w.u64(static_cast<std::uint64_t>(forest.spec.max_depth));
    w.u64(forest.spec.seed);
    w.u8(forest.constant_flag ? 1 : 0);
    w.i64(forest.constant_label);
    w.u64(forest.trees.size());
    for (const auto& tree : forest.trees) {
        w.u64(tree.nodes.size());
        for (const auto& n : tree.nodes) {
            w.i64(n.feature);
            w.f64(n.threshold);
            w.i64(n.left);
            w.i64(n.right);
            w.i64(n.label);
        }
    }
}

inline RandomForest read_forest(Reader& r) {
    RandomForest forest;
    forest.spec.n_trees = static_cast<int>(r.u64());
    forest.spec.max_depth = static_cast<int>(r.u64());
    forest.spec.seed = r.u64();
    forest.constant_flag = r.u8() != 0;
    forest.constant_label = static_cast<int>(r.i64());
    forest.trees.resize(r.u64());
    for (auto& tree : forest.trees) {
        tree.nodes.resize(r.u64());
        for (auto& n : tree.nodes) {
            n.feature = static_cast<int>(r.i64());
            n.threshold = r.f64();
            n.left = static_cast<int>(r.i64());
            n.right = static_cast<int>(r.i64());
            n.label = static_cast<int>(r.i64());
        }
    }
    return forest;
}

inline void write_svm(Writer& w, const SvmRbf& svm) {
    w.f64(svm.spec.C);
    w.f64(svm.spec.gamma);
    w.f64(svm.gamma);
    w.f64(svm.bias);
    w.u8(svm.constant_flag ? 1 : 0);
    w.i64(svm.constant_label);
    w.i64(svm.label_neg);
    w.i64(svm.label_pos);
    w.mat(svm.support_vectors);
    w.vec(svm.alpha_y);
}

inline SvmRbf read_svm(Reader& r) {
    SvmRbf svm;
    svm.spec.C = r.f64();
    svm.spec.gamma = r.f64();
    svm.gamma = r.f64();
    svm.bias = r.f64();
    svm.constant_flag = r.u8() != 0;
    svm.constant_label = static_cast<int>(r.i64());
    svm.label_neg = static_cast<int>(r.i64());
    svm.label_pos = static_cast<int>(r.i64());
    svm.support_vectors = r.mat();
    svm.alpha_y = r.vec();
    return svm;
}

} // namespace detail

inline constexpr char kModelMagic[4] = {'A', 'M', 'D', 'C'};
inline constexpr std::uint32_t kModelVersion = 1;

inline void save_model(const PipelineModel& model, const std::filesystem::path& path) {
    detail::Writer w;
    w.buf.append(kModelMagic, 4);
    w.u32(kModelVersion);

    // config snapshot as the flat key=value document
    std::string config_text;
    for (const auto& [k, v] : config_entries(model.config)) config_text += k + "=" + v + "\n";
    w.str(config_text);

    w.u64(model.schema.dimension());
    for (const auto& a : model.schema.attributes) {
        w.str(a.name);
        w.u8(a.kind == AttributeKind::binary ? 0 : 1);
        w.i64(a.levels);
        w.str(a.group);
    }
    w.u64(detail::schema_hash(model.schema));

    const auto& red = model.reducer;
    w.u8(red.spec.kind == ReducerKind::variance_linear ? 0 : 1);
    w.i64(red.spec.target_dim);
    w.i64(red.spec.n_neighbors);
    w.u64(red.spec.seed);
    w.i64(red.input_dim);
    w.u8(red.rank_deficient_flag ? 1 : 0);
    w.dense(red.mean.size() ? red.mean : Vector(0));
    w.mat(red.components.size() ? red.components : Matrix(0, 0));
    w.dense(red.explained_variance.size() ? red.explained_variance : Vector(0));
    w.mat(red.anchors.size() ? red.anchors : Matrix(0, 0));
    w.mat(red.embedding.size() ? red.embedding : Matrix(0, 0));

    w.u64(model.zeroshot.per_attribute.size());
    for (const auto& clf : model.zeroshot.per_attribute) {
        if (const auto* forest = std::get_if<RandomForest>(&clf.impl)) {
            w.u8(0);
            detail::write_forest(w, *forest);
        } else {
            w.u8(1);
            detail::write_svm(w, std::get<SvmRbf>(clf.impl));
        }
    }

    w.u32(detail::crc32(w.buf));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    if (!out) throw IoError("write failure on " + path.string());
}

inline PipelineModel load_model(const std::filesystem::path& path,
                                const AttributeSchema* expected_schema = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 12 || std::memcmp(buf.data(), kModelMagic, 4) != 0)
        throw IoError(path.string() + ": not a model file (bad magic)");
    const std::string body = buf.substr(0, buf.size() - 4);
    detail::Reader crc_reader{buf, buf.size() - 4};
    if (crc_reader.u32() != detail::crc32(body))
        throw IoError(path.string() + ": checksum failure");

    detail::Reader r{body, 4};
    const auto version = r.u32();
    if (version != kModelVersion)
        throw IoError(path.string() + ": unsupported model version " + std::to_string(version));

    PipelineModel model;
    {
        std::istringstream config_in(r.str());
        model.config = parse_config(read_config_entries(config_in, path.string()));
    }

    const auto n_attrs = r.u64();
    for (std::uint64_t j = 0; j < n_attrs; ++j) {
        AttributeDef a;
        a.name = r.str();
        a.kind = r.u8() == 0 ? AttributeKind::binary : AttributeKind::ordinal;
        a.levels = static_cast<int>(r.i64());
        a.group = r.str();
        model.schema.attributes.push_back(std::move(a));
    }
    const auto stored_hash = r.u64();
    if (stored_hash != detail::schema_hash(model.schema))
        throw IoError(path.string() + ": schema hash does not match embedded schema");
    if (expected_schema && stored_hash != detail::schema_hash(*expected_schema))
        throw IoError(path.string() + ": schema mismatch with the requested schema");

    auto& red = model.reducer;
    red.spec.kind = r.u8() == 0 ? ReducerKind::variance_linear : ReducerKind::neighbor_manifold;
    red.spec.target_dim = r.i64();
    red.spec.n_neighbors = r.i64();
    red.spec.seed = r.u64();
    red.input_dim = r.i64();
    red.rank_deficient_flag = r.u8() != 0;
    red.mean = r.dense();
    red.components = r.mat();
    red.explained_variance = r.dense();
    red.anchors = r.mat();
    red.embedding = r.mat();

    model.zeroshot.schema = model.schema;
    model.zeroshot.config = model.config.classifier;
    const auto n_clf = r.u64();
    for (std::uint64_t j = 0; j < n_clf; ++j) {
        AttributeClassifier clf;
        if (r.u8() == 0)
            clf.impl = detail::read_forest(r);
        else
            clf.impl = detail::read_svm(r);
        model.zeroshot.per_attribute.push_back(std::move(clf));
    }
    model.zeroshot.validate();
    return model;
}

} // namespace microact
