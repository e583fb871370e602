#pragma once

#include "neurotree/gp/primitive_set.hpp"
#include "neurotree/objectives.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree::gp {

/// Expression tree node. Value type: copying a Node deep-copies the subtree,
/// so a tree is never mutated behind another holder's back.
struct Node {
    const PrimitiveSpec* primitive = nullptr;
    std::vector<Node> children;
    std::optional<Constant> value;

    SemType type() const { return primitive->output_type; }

    /// Structural equality: same primitives, same constants, same shape.
    bool operator==(const Node& other) const;
};

Node make_terminal(const PrimitiveSpec& spec);
Node make_constant(const PrimitiveSpec& ephemeral, Constant value);
Node make_node(const PrimitiveSpec& spec, std::vector<Node> children);

/// Child indices from the root; empty path is the root itself.
using Path = std::vector<std::size_t>;

std::string to_string(const Path& path);

std::size_t node_count(const Node& root);
/// A lone terminal has depth 1.
int depth(const Node& root);

const Node& node_at(const Node& root, const Path& path);
/// Returns a copy of `root` with the subtree at `path` replaced.
Node replace_at(const Node& root, const Path& path, Node replacement);

/// Pre-order list of paths whose node satisfies `pred`.
std::vector<Path> collect_paths(const Node& root, const std::function<bool(const Node&)>& pred);
/// Depth of the node at `path` counted from the root (root = 1).
inline int level_of(const Path& path) { return static_cast<int>(path.size()) + 1; }

struct TypeViolation {
    Path path;
    std::optional<SemType> expected;
    std::optional<SemType> actual;
    std::string message;
};

struct ValidationReport {
    std::optional<TypeViolation> violation;

    bool ok() const { return !violation.has_value(); }
};

/// Reports the first (pre-order) type violation. Never throws.
ValidationReport validate_types(const Node& root, const PrimitiveSet& pset,
                                std::optional<SemType> expected_root = std::nullopt);

enum class Origin : std::uint8_t { Seed, Random, Crossover, Mutation };

std::string_view to_string(Origin origin);
std::optional<Origin> origin_from_string(std::string_view name);

struct Individual {
    Node root;
    std::optional<ObjectiveVector> objectives;
    std::uint64_t id = 0;
    std::vector<std::uint64_t> parent_ids;
    Origin origin = Origin::Random;

    bool evaluated() const { return objectives.has_value(); }
};

class NoTerminalForType : public std::runtime_error {
public:
    explicit NoTerminalForType(SemType t)
        : std::runtime_error("no terminal for type " + std::string(to_string(t)) + " within depth limits"), type(t)
    {
    }
    SemType type;
};

class UnsatisfiableType : public std::runtime_error {
public:
    explicit UnsatisfiableType(SemType t)
        : std::runtime_error("type " + std::string(to_string(t)) + " is unreachable from the primitive set"), type(t)
    {
    }
    SemType type;
};

} // namespace neurotree::gp
