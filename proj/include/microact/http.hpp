#pragma once

#include <string>

#include <httplib.h>

// glibc's resolv.h (dragged in by the socket headers) defines _res as a
// macro, which collides with Eigen parameter names in later instantiations
#ifdef _res
#undef _res
#endif

#include "microact/embedding.hpp"

namespace microact {

/// POST the query as text/plain; the raw response body is returned verbatim.
/// No retry on transport failure.
inline PostResult post_query(const std::string& endpoint_url, const std::string& query) {
    PostResult result;
    const auto scheme_end = endpoint_url.find("://");
    if (scheme_end == std::string::npos) {
        result.error = "endpoint must be an http:// URL";
        return result;
    }
    const auto path_start = endpoint_url.find('/', scheme_end + 3);
    const std::string host = endpoint_url.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : endpoint_url.substr(path_start);

    httplib::Client client(host);
    const auto res = client.Post(path, query, "text/plain");
    if (!res) {
        result.error = "transport failure: " + httplib::to_string(res.error());
        return result;
    }
    result.ok = res->status >= 200 && res->status < 300;
    result.status = res->status;
    result.body = res->body;
    return result;
}

} // namespace microact
