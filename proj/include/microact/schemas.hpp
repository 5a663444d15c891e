#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "microact/embedding.hpp"
#include "microact/ingest.hpp"
#include "microact/zeroshot.hpp"

namespace microact {

/// 18 binary motion attributes describing body movement and handled items.
inline AttributeSchema lara_schema() {
    AttributeSchema s;
    const auto bin = [&](const char* name, const char* group) {
        s.attributes.push_back({name, AttributeKind::binary, 2, group});
    };
    bin("gait_cycle", "legs");
    bin("step", "legs");
    bin("standing_still", "legs");
    bin("upwards", "torso");
    bin("centred", "torso");
    bin("downwards", "torso");
    bin("no_intentional_motion", "torso");
    bin("torso_rotation", "torso");
    bin("right_hand", "arms");
    bin("left_hand", "arms");
    bin("no_arms", "arms");
    bin("bulky_unit", "item");
    bin("handy_unit", "item");
    bin("utility_aux", "item");
    bin("cart", "item");
    bin("computer", "item");
    bin("no_item", "item");
    bin("none", "item");
    return s;
}

/// 30-dimension verb-attribute layout: transitivity flags, aspect, motion
/// energy, duration, social context, five body parts, and 18 effect flags.
inline AttributeSchema verb_schema() {
    AttributeSchema s;
    const auto bin = [&](const char* name, const char* group) {
        s.attributes.push_back({name, AttributeKind::binary, 2, group});
    };
    const auto ord = [&](const char* name, int levels, const char* group) {
        s.attributes.push_back({name, AttributeKind::ordinal, levels, group});
    };
    bin("intransitive", "transitivity");
    bin("transitive_person", "transitivity");
    bin("transitive_object", "transitivity");
    ord("aspect", 5, "aspect");
    ord("motion", 5, "motion");
    ord("time", 5, "time");
    ord("social", 3, "social");
    bin("arms", "body");
    bin("head", "body");
    bin("legs", "body");
    bin("torso", "body");
    bin("other_body", "body");
    bin("object_moved", "effect");
    bin("object_created", "effect");
    bin("object_destroyed", "effect");
    bin("object_combined", "effect");
    bin("object_separated", "effect");
    bin("object_transferred", "effect");
    bin("location_changed", "effect");
    bin("external_world_changed", "effect");
    bin("agent_moved", "effect");
    bin("agent_changed", "effect");
    bin("recipient_changed", "effect");
    bin("surface_contact", "effect");
    bin("object_state_changed", "effect");
    bin("object_contained", "effect");
    bin("temperature_changed", "effect");
    bin("shape_changed", "effect");
    bin("ownership_changed", "effect");
    bin("information_transferred", "effect");
    return s;
}

inline AttributeSchema builtin_schema(const std::string& name) {
    if (name == "lara") return lara_schema();
    if (name == "verb") return verb_schema();
    throw ValidationError("unknown built-in schema '" + name + "'");
}

/// Schema file: records `name,kind,levels,group`.
inline AttributeSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    AttributeSchema s;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "name,kind,levels,group") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 4)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'name,kind,levels,group'");
        AttributeDef def;
        def.name = f[0];
        if (f[1] == "binary")
            def.kind = AttributeKind::binary;
        else if (f[1] == "ordinal")
            def.kind = AttributeKind::ordinal;
        else
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": unknown kind '" + f[1] + "'");
        def.levels = static_cast<int>(detail::parse_int64(f[2], path.string(), line_no));
        def.group = f[3];
        s.attributes.push_back(def);
    }
    s.validate();
    return s;
}

/// Default phrasing for the verb schema.
inline PhraseMap verb_phrase_map() {
    PhraseMap pm;
    auto set = [&](const char* attr, int v, const std::string& text) {
        pm.fragments[{attr, v}] = text;
    };
    set("intransitive", 1, "is intransitive");
    set("intransitive", 0, "is transitive");
    set("transitive_person", 1, "can be used in the form of someone");
    set("transitive_person", 0, "is not used with a person");
    set("transitive_object", 1, "can be used in the form of something");
    set("transitive_object", 0, "is not used with an object");
    set("aspect", 0, "describes a state");
    set("aspect", 1, "describes an ongoing activity");
    set("aspect", 2, "shows an accomplishment");
    set("aspect", 3, "shows achievement");
    set("aspect", 4, "describes a momentary act");
    set("motion", 0, "requires no motion");
    set("motion", 1, "requires slight motion");
    set("motion", 2, "requires low motion");
    set("motion", 3, "requires medium motion");
    set("motion", 4, "requires high motion");
    set("time", 0, "requires almost no time");
    set("time", 1, "requires time in order of seconds");
    set("time", 2, "requires time in order of minutes");
    set("time", 3, "requires time in order of hours");
    set("time", 4, "requires time in order of days");
    set("social", 0, "has no social context");
    set("social", 1, "is performed with others");
    set("social", 2, "is performed in solitary");
    const auto body = [&](const char* attr, const std::string& noun) {
        set(attr, 1, "requires the " + noun + " to be used for the action");
        set(attr, 0, "does not require the " + noun);
    };
    body("arms", "arms");
    body("head", "head");
    body("legs", "legs");
    body("torso", "torso");
    body("other_body", "other body parts");
    const auto effect = [&](const char* attr, const std::string& clause) {
        set(attr, 1, clause);
        set(attr, 0, "does not have the property that it " + clause);
    };
    effect("object_moved", "moves the object");
    effect("object_created", "creates the object");
    effect("object_destroyed", "destroys the object");
    effect("object_combined", "combines objects");
    effect("object_separated", "separates objects");
    effect("object_transferred", "transfers the object");
    effect("location_changed", "changes the location");
    effect("external_world_changed", "changes the external world");
    effect("agent_moved", "moves the person doing it");
    effect("agent_changed", "changes the person doing it");
    effect("recipient_changed", "changes the recipient");
    effect("surface_contact", "involves surface contact");
    effect("object_state_changed", "changes the state of the object");
    effect("object_contained", "puts the object inside something");
    effect("temperature_changed", "changes the temperature");
    effect("shape_changed", "changes the shape of the object");
    effect("ownership_changed", "changes the ownership of the object");
    effect("information_transferred", "transfers information");
    return pm;
}

/// Default phrasing for the LARa motion attributes.
inline PhraseMap lara_phrase_map() {
    PhraseMap pm;
    const auto pair = [&](const char* attr, const std::string& clause) {
        pm.fragments[{attr, 1}] = "involves " + clause;
        pm.fragments[{attr, 0}] = "does not involve " + clause;
    };
    pair("gait_cycle", "a gait cycle");
    pair("step", "a step");
    pair("standing_still", "standing still");
    pair("upwards", "an upwards torso posture");
    pair("centred", "a centred torso posture");
    pair("downwards", "a downwards torso posture");
    pair("no_intentional_motion", "no intentional motion");
    pair("torso_rotation", "a torso rotation");
    pair("right_hand", "the right hand");
    pair("left_hand", "the left hand");
    pair("no_arms", "no arm use");
    pair("bulky_unit", "handling a bulky unit");
    pair("handy_unit", "handling a handy unit");
    pair("utility_aux", "a utility tool");
    pair("cart", "a cart");
    pair("computer", "a computer");
    pair("no_item", "no handled item");
    pair("none", "no attribute");
    return pm;
}

inline PhraseMap builtin_phrase_map(const std::string& schema_name) {
    if (schema_name == "lara") return lara_phrase_map();
    if (schema_name == "verb") return verb_phrase_map();
    throw ValidationError("no built-in phrase map for schema '" + schema_name + "'");
}

/// Small demonstration corpus with hand-filled vectors; real corpora are
/// user-supplied files.
inline VerbCorpus demo_verb_corpus() {
    const auto schema = verb_schema();
    VerbCorpus corpus;
    const auto add = [&](const char* verb, const char* tmpl, const std::string& csv) {
        corpus.entries.push_back({verb, tmpl, parse_attribute_string(schema, csv)});
    };
    // layout: intrans,trans_person,trans_object,aspect,motion,time,social,
    //         arms,head,legs,torso,other, then 18 effect flags
    add("open", "open <container>", "0,0,1,3,2,1,2,1,0,0,0,0,1,0,0,0,1,0,0,0,0,0,0,0,1,0,0,0,0,0");
    add("close", "close <container>", "0,0,1,3,2,1,2,1,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0");
    add("pour", "pour <liquid>", "0,0,1,2,3,1,2,1,0,0,0,0,1,0,0,0,1,1,0,1,0,0,0,0,1,1,0,0,0,0");
    add("stir", "stir <mixture>", "0,0,1,1,3,2,2,1,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,1,0,0,0,0,0");
    add("take", "take <object>", "0,0,1,3,2,1,2,1,0,0,0,0,1,0,0,0,0,1,0,0,0,0,0,0,0,0,0,1,0,0");
    add("put", "put <object> down", "0,0,1,3,2,1,2,1,0,0,0,0,1,0,0,0,0,1,1,0,0,0,0,1,0,0,0,0,0,0");
    add("spray", "spray <surface>", "1,0,1,3,3,1,2,1,0,0,0,0,0,1,0,0,0,0,0,1,0,0,0,0,1,0,0,0,0,0");
    add("shake", "shake <container>", "0,0,1,1,4,1,2,1,0,0,0,0,1,0,0,1,0,0,0,0,0,0,0,0,1,0,0,0,0,0");
    add("walk", "walk <somewhere>", "1,0,0,1,3,2,2,0,0,1,1,0,0,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,0,0");
    add("run", "run <somewhere>", "1,0,0,1,4,2,2,0,0,1,1,0,0,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,0,0");
    add("stand", "stand still", "1,0,0,0,0,2,2,0,0,1,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0");
    add("sit", "sit down", "1,0,0,3,1,1,2,0,0,1,1,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0");
    add("lift", "lift <object>", "0,0,1,3,3,1,2,1,0,0,1,0,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0");
    add("carry", "carry <object>", "0,0,1,1,3,2,2,1,0,1,1,0,1,0,0,0,0,1,1,0,1,0,0,0,0,0,0,0,0,0");
    add("push", "push <cart>", "0,0,1,1,3,2,2,1,0,1,1,0,1,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,0,0");
    add("pull", "pull <cart>", "0,0,1,1,3,2,2,1,0,1,1,0,1,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,0,0");
    add("cut", "cut <food>", "0,0,1,2,2,2,2,1,0,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,1,0,0,1,0,0");
    add("chop", "chop <food>", "0,0,1,2,3,2,2,1,0,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,1,0,0,1,0,0");
    add("mix", "mix <ingredients>", "0,0,1,2,3,2,2,1,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,1,0,0,0,0,0");
    add("wash", "wash <dish>", "0,0,1,2,2,2,2,1,0,0,0,0,0,0,0,0,0,0,0,1,0,0,1,1,0,0,0,0,0,0");
    add("wipe", "wipe <surface>", "0,0,1,2,2,1,2,1,0,0,0,0,0,0,0,0,0,0,0,1,0,0,1,1,0,0,0,0,0,0");
    add("crack", "crack <egg>", "0,0,1,3,2,0,2,1,0,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,1,0,1,0,0,0");
    add("squeeze", "squeeze <bottle>", "0,0,1,3,2,0,2,1,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,1,0,1,0,0,0");
    add("flip", "flip <object> down", "0,0,1,3,2,0,2,1,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0");
    add("twist", "twist <cap>", "0,0,1,3,2,0,2,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0");
    add("grab", "grab <object>", "0,0,1,3,2,0,2,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1,0,0,0,0,1,0,0");
    add("place", "place <object> on <surface>", "0,0,1,3,2,1,2,1,0,0,0,0,1,0,0,0,0,1,1,0,0,0,0,1,0,0,0,0,0,0");
    add("reach", "reach for <object>", "1,0,1,3,2,0,2,1,0,0,1,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0");
    add("bend", "bend down", "1,0,0,3,2,0,2,0,0,1,1,0,0,0,0,0,0,0,0,0,1,1,0,0,0,0,0,0,0,0");
    add("turn", "turn around", "1,0,0,3,2,0,2,0,0,1,1,0,0,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0,0,0");
    add("read", "read <label>", "0,0,1,1,0,2,2,0,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1");
    add("type", "type on <computer>", "1,0,1,1,1,2,2,1,0,0,0,0,0,1,0,0,0,1,0,0,0,0,0,0,0,0,0,0,0,1");
    add("scan", "scan <item>", "0,0,1,3,1,0,2,1,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,0,1");
    add("pack", "pack <box>", "0,0,1,2,2,2,2,1,0,0,0,0,1,0,0,1,0,0,0,0,0,0,0,0,0,1,0,0,0,0");
    add("unpack", "unpack <box>", "0,0,1,2,2,2,2,1,0,0,0,0,1,0,0,0,1,0,0,0,0,0,0,0,0,0,0,0,0,0");
    add("throw", "throw <object>", "0,0,1,4,4,0,2,1,0,0,1,0,1,0,0,0,0,1,1,0,0,0,0,0,0,0,0,0,0,0");
    add("catch", "catch <object>", "0,0,1,4,3,0,2,1,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,1,0,0");
    add("pin", "pin <note>", "0,0,1,3,1,0,2,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0");
    add("sling", "sling <bag>", "0,0,1,3,3,0,2,1,0,0,1,0,1,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,0,0");
    add("measure", "measure <ingredient>", "0,0,1,2,1,1,2,1,1,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,1,0,0,0,1");
    corpus.validate(schema);
    return corpus;
}

} // namespace microact
