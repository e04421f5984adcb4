#pragma once

#include "zx/diagram.hpp"

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

namespace zx {

/// Diagram file format, version 1:
///   {"version":1,
///    "nodes":[{"id":0,"kind":"Z","quarter_turns":1,"symbols":{"3":-1}}, ...],
///    "edges":[[0,1], ...], "inputs":[...], "outputs":[...]}
/// "quarter_turns" and "symbols" are only written for spiders. Unfuse marks, when present, are
/// stored as "unfuse_marked":true on the node and a top-level "marked_edges" list.
nlohmann::json to_json(const Diagram& d);
/// Normalizes quarter_turns modulo 4; throws InputError naming the offending field.
Diagram from_json(const nlohmann::json& j);

/// Compact single-line JSON document.
std::string serialize(const Diagram& d);
Diagram     deserialize(const std::string& text);

/// One diagram per line.
void                 write_jsonl(std::ostream& os, const std::vector<Diagram>& diagrams);
std::vector<Diagram> read_jsonl(std::istream& is);

std::vector<Diagram> load_corpus(const std::string& path);
void                 save_corpus(const std::string& path, const std::vector<Diagram>& diagrams);

} // namespace zx
