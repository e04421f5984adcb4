#include "zx/serialize.hpp"

#include "zx/errors.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace zx {

using nlohmann::json;

namespace {

NodeKind parse_kind(const std::string& s, const std::string& where) {
    if (s == "Z") {
        return NodeKind::Z;
    }
    if (s == "X") {
        return NodeKind::X;
    }
    if (s == "H") {
        return NodeKind::Hadamard;
    }
    if (s == "IN") {
        return NodeKind::Input;
    }
    if (s == "OUT") {
        return NodeKind::Output;
    }
    throw InputError(where + ".kind: unknown node kind '" + s + "'");
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        throw InputError(where + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(where + "." + key + ": " + e.what());
    }
}

std::vector<NodeId> id_list(const json& j, const char* key) {
    if (!j.contains(key)) {
        return {};
    }
    return field<std::vector<NodeId>>(j, key, "document");
}

} // namespace

json to_json(const Diagram& d) {
    json nodes = json::array();
    d.for_each_node([&](NodeId id, const Node& n) {
        json jn = {{"id", id}, {"kind", std::string(to_string(n.kind))}};
        if (is_spider(n.kind)) {
            jn["quarter_turns"] = n.angle.quarter_turns();
            if (!n.angle.is_concrete()) {
                json sym = json::object();
                for (const auto& [s, c]: n.angle.symbols()) {
                    sym[std::to_string(s)] = c;
                }
                jn["symbols"] = sym;
            }
        }
        if (n.unfuse_marked) {
            jn["unfuse_marked"] = true;
        }
        nodes.push_back(std::move(jn));
    });
    json edges = json::array();
    for (const EdgeKey& e: d.edges()) {
        for (int k = 0; k < d.multiplicity(e.lo, e.hi); ++k) {
            edges.push_back({e.lo, e.hi});
        }
    }
    json j = {{"version", 1}, {"nodes", nodes}, {"edges", edges}, {"inputs", d.inputs()}, {"outputs", d.outputs()}};
    if (!d.marked_edges().empty()) {
        json marked = json::array();
        for (const EdgeKey& e: d.marked_edges()) {
            marked.push_back({e.lo, e.hi});
        }
        j["marked_edges"] = marked;
    }
    return j;
}

Diagram from_json(const json& j) {
    if (!j.is_object()) {
        throw InputError("document: expected a JSON object");
    }
    const int version = field<int>(j, "version", "document");
    if (version != 1) {
        throw InputError("version: unsupported format version " + std::to_string(version));
    }
    if (!j.contains("nodes") || !j["nodes"].is_array()) {
        throw InputError("nodes: missing or not an array");
    }
    Diagram d;
    for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
        const json&       jn    = j["nodes"][i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        Node              n;
        n.kind = parse_kind(field<std::string>(jn, "kind", where), where);
        if (is_spider(n.kind)) {
            n.angle = Angle(jn.contains("quarter_turns") ? field<int>(jn, "quarter_turns", where) : 0);
            if (jn.contains("symbols")) {
                if (!jn["symbols"].is_object()) {
                    throw InputError(where + ".symbols: expected an object");
                }
                for (const auto& [key, coef]: jn["symbols"].items()) {
                    SymbolId id = 0;
                    try {
                        id = std::stoi(key);
                    } catch (const std::exception&) {
                        throw InputError(where + ".symbols: bad symbol id '" + key + "'");
                    }
                    if (!coef.is_number_integer()) {
                        throw InputError(where + ".symbols." + key + ": expected an integer");
                    }
                    n.angle += Angle::symbol(id, coef.get<int>());
                }
            }
        } else if (jn.contains("quarter_turns") || jn.contains("symbols")) {
            throw InputError(where + ": only Z/X spiders carry a phase");
        }
        n.unfuse_marked = jn.value("unfuse_marked", false);
        try {
            d.insert_node(field<NodeId>(jn, "id", where), n);
        } catch (const ContractError& e) {
            throw InputError(where + ".id: " + e.what());
        }
    }
    if (!j.contains("edges") || !j["edges"].is_array()) {
        throw InputError("edges: missing or not an array");
    }
    auto read_pair = [&](const json& je, const std::string& where) {
        if (!je.is_array() || je.size() != 2 || !je[0].is_number_integer() || !je[1].is_number_integer()) {
            throw InputError(where + ": expected [u, v]");
        }
        const NodeId u = je[0].get<NodeId>();
        const NodeId v = je[1].get<NodeId>();
        if (!d.has_node(u) || !d.has_node(v)) {
            throw InputError(where + ": unknown node id");
        }
        return EdgeKey::of(u, v);
    };
    for (std::size_t i = 0; i < j["edges"].size(); ++i) {
        const EdgeKey e = read_pair(j["edges"][i], "edges[" + std::to_string(i) + "]");
        d.add_edge(e.lo, e.hi);
    }
    d.set_boundary(id_list(j, "inputs"), id_list(j, "outputs"));
    if (j.contains("marked_edges")) {
        for (std::size_t i = 0; i < j["marked_edges"].size(); ++i) {
            const std::string where = "marked_edges[" + std::to_string(i) + "]";
            const EdgeKey     e     = read_pair(j["marked_edges"][i], where);
            if (!d.connected(e.lo, e.hi)) {
                throw InputError(where + ": edge does not exist");
            }
            d.set_edge_marked(e, true);
        }
    }
    d.validate();
    return d;
}

std::string serialize(const Diagram& d) {
    return to_json(d).dump();
}

Diagram deserialize(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto offset = std::min<std::size_t>(e.byte, text.size());
        const auto line   = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
        throw InputError("line " + std::to_string(line) + ": " + e.what());
    }
    return from_json(j);
}

void write_jsonl(std::ostream& os, const std::vector<Diagram>& diagrams) {
    for (const Diagram& d: diagrams) {
        os << serialize(d) << '\n';
    }
}

std::vector<Diagram> read_jsonl(std::istream& is) {
    std::vector<Diagram> out;
    std::string          line;
    std::size_t          lineNo = 0;
    while (std::getline(is, line)) {
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(deserialize(line));
        } catch (const InputError& e) {
            throw InputError("record " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Diagram> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    return read_jsonl(in);
}

void save_corpus(const std::string& path, const std::vector<Diagram>& diagrams) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    write_jsonl(out, diagrams);
}

} // namespace zx
