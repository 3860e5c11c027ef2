#pragma once

#include <string>

#include <json.hpp>

namespace povqa {

using json = nlohmann::json;

// Canonical document encoding shared by every artifact the toolkit writes:
// object keys sorted (nlohmann's default map order), floating-point numbers
// rendered as fixed 3-decimal strings, integers verbatim, no NaN/inf.
// parse(serialize(x)) is byte-stable for documents already in canonical form.
std::string canonical_dump(const json& v);

// Same, one JSON document per line (JSONL record).
std::string canonical_line(const json& v);

// Hash of the canonical encoding; used for config hashes in manifests.
std::string canonical_hash(const json& v);

}  // namespace povqa
