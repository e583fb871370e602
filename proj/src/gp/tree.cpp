#include "neurotree/gp/tree.hpp"

#include <algorithm>

namespace neurotree::gp {

bool Node::operator==(const Node& other) const
{
    if (primitive != other.primitive && (primitive == nullptr || other.primitive == nullptr ||
                                         primitive->name != other.primitive->name)) {
        return false;
    }
    return value == other.value && children == other.children;
}

Node make_terminal(const PrimitiveSpec& spec)
{
    if (!spec.is_terminal() || spec.ephemeral) {
        throw std::invalid_argument(spec.name + " is not a plain terminal");
    }
    return Node{&spec, {}, std::nullopt};
}

Node make_constant(const PrimitiveSpec& ephemeral, Constant value)
{
    if (!ephemeral.ephemeral) {
        throw std::invalid_argument(ephemeral.name + " is not an ephemeral");
    }
    return Node{&ephemeral, {}, std::move(value)};
}

Node make_node(const PrimitiveSpec& spec, std::vector<Node> children)
{
    return Node{&spec, std::move(children), std::nullopt};
}

std::string to_string(const Path& path)
{
    std::string out = "/";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) {
            out += '/';
        }
        out += std::to_string(path[i]);
    }
    return out;
}

std::size_t node_count(const Node& root)
{
    std::size_t n = 1;
    for (const auto& c : root.children) {
        n += node_count(c);
    }
    return n;
}

int depth(const Node& root)
{
    int d = 0;
    for (const auto& c : root.children) {
        d = std::max(d, depth(c));
    }
    return d + 1;
}

const Node& node_at(const Node& root, const Path& path)
{
    const Node* n = &root;
    for (auto i : path) {
        if (i >= n->children.size()) {
            throw std::out_of_range("path " + to_string(path) + " leaves the tree");
        }
        n = &n->children[i];
    }
    return *n;
}

Node replace_at(const Node& root, const Path& path, Node replacement)
{
    Node copy = root;
    Node* n = &copy;
    for (auto i : path) {
        if (i >= n->children.size()) {
            throw std::out_of_range("path " + to_string(path) + " leaves the tree");
        }
        n = &n->children[i];
    }
    *n = std::move(replacement);
    return copy;
}

namespace {

void collect(const Node& n, Path& cur, const std::function<bool(const Node&)>& pred, std::vector<Path>& out)
{
    if (pred(n)) {
        out.push_back(cur);
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        cur.push_back(i);
        collect(n.children[i], cur, pred, out);
        cur.pop_back();
    }
}

std::optional<TypeViolation> check(const Node& n, const PrimitiveSet& pset, Path& path, std::optional<SemType> expected)
{
    if (n.primitive == nullptr) {
        return TypeViolation{path, expected, std::nullopt, "node has no primitive"};
    }
    if (!pset.contains(n.primitive)) {
        return TypeViolation{path, expected, n.primitive->output_type,
                             "primitive " + n.primitive->name + " is not in the primitive set"};
    }
    if (expected && n.primitive->output_type != *expected) {
        return TypeViolation{path, expected, n.primitive->output_type,
                             n.primitive->name + " produces " + std::string(to_string(n.primitive->output_type)) +
                                 " where " + std::string(to_string(*expected)) + " is expected"};
    }
    if (n.children.size() != n.primitive->arity()) {
        return TypeViolation{path, expected, n.primitive->output_type,
                             n.primitive->name + " takes " + std::to_string(n.primitive->arity()) + " arguments, got " +
                                 std::to_string(n.children.size())};
    }
    if (n.primitive->ephemeral != n.value.has_value()) {
        return TypeViolation{path, expected, n.primitive->output_type,
                             n.primitive->ephemeral ? "ephemeral without a value" : "constant on a non-ephemeral node"};
    }
    if (n.value && constant_type(*n.value) != n.primitive->output_type) {
        return TypeViolation{path, n.primitive->output_type, constant_type(*n.value), "constant of the wrong type"};
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        path.push_back(i);
        auto v = check(n.children[i], pset, path, n.primitive->input_types[i]);
        path.pop_back();
        if (v) {
            return v;
        }
    }
    return std::nullopt;
}

} // namespace

std::vector<Path> collect_paths(const Node& root, const std::function<bool(const Node&)>& pred)
{
    std::vector<Path> out;
    Path cur;
    collect(root, cur, pred, out);
    return out;
}

ValidationReport validate_types(const Node& root, const PrimitiveSet& pset, std::optional<SemType> expected_root)
{
    Path path;
    return ValidationReport{check(root, pset, path, expected_root)};
}

std::string_view to_string(Origin origin)
{
    switch (origin) {
    case Origin::Seed: return "seed";
    case Origin::Random: return "random";
    case Origin::Crossover: return "crossover";
    case Origin::Mutation: return "mutation";
    }
    return "?";
}

std::optional<Origin> origin_from_string(std::string_view name)
{
    for (auto o : {Origin::Seed, Origin::Random, Origin::Crossover, Origin::Mutation}) {
        if (to_string(o) == name) {
            return o;
        }
    }
    return std::nullopt;
}

} // namespace neurotree::gp
