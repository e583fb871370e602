#include "neurotree/evolution/operators.hpp"

#include "neurotree/gp/generate.hpp"
#include "neurotree/primitives/library.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <stdexcept>

namespace neurotree::evolution {

using gp::Node;
using gp::ParamField;
using gp::Path;
using gp::PrimitiveSpec;
using gp::SemType;

namespace {

// Deepest fresh argument generated by insert-style operators.
constexpr int kFreshArgDepth = 2;
// Deepest replacement subtree generated by uniform mutation.
constexpr int kUniformDepth = 4;

MaybeTree within_limit(Node tree, const OperatorContext& ctx)
{
    if (gp::depth(tree) > ctx.depth_limit) {
        return std::nullopt;
    }
    return tree;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng)
{
    return v[rng.index(v.size())];
}

Path parent_of(const Path& p) { return Path(p.begin(), p.end() - 1); }

Path child_path(Path p, std::size_t i)
{
    p.push_back(i);
    return p;
}

bool is_single_input_layer(const Node& n)
{
    if (n.type() != SemType::LayerUnit) {
        return false;
    }
    return std::count(n.primitive->input_types.begin(), n.primitive->input_types.end(), SemType::LayerUnit) == 1;
}

std::size_t layer_child_index(const Node& n)
{
    const auto& in = n.primitive->input_types;
    return static_cast<std::size_t>(std::find(in.begin(), in.end(), SemType::LayerUnit) - in.begin());
}

/// Random tree for an argument slot with at most `max_depth` levels.
std::optional<Node> fresh_argument(SemType type, ParamField field, int max_depth, const OperatorContext& ctx, Rng& rng)
{
    if (max_depth < 1) {
        return std::nullopt;
    }
    const auto method = rng.bernoulli(0.5) ? gp::GenMethod::Grow : gp::GenMethod::Full;
    try {
        return gp::generate_tree(rng, ctx.pset, method, 1, std::min(max_depth, kFreshArgDepth), type, field);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<Path> ephemeral_paths(const Node& root)
{
    return gp::collect_paths(root, [](const Node& n) { return n.primitive->ephemeral; });
}

std::vector<Path> paths_of_type(const Node& root, SemType t)
{
    return gp::collect_paths(root, [t](const Node& n) { return n.type() == t; });
}

Node with_value(const Node& n, gp::Constant v)
{
    Node out = n;
    out.value = std::move(v);
    return out;
}

std::optional<Path> ephemeral_partner(const Node& a, const Path& pa, const Node& b, Rng& rng)
{
    const SemType t = gp::node_at(a, pa).type();
    const ParamField f = slot_field(a, pa);
    std::vector<Path> matches;
    for (auto& pb : ephemeral_paths(b)) {
        if (gp::node_at(b, pb).type() == t && slot_field(b, pb) == f) {
            matches.push_back(std::move(pb));
        }
    }
    if (matches.empty()) {
        return std::nullopt;
    }
    return pick(matches, rng);
}

/// Parent copies stand in for children that would break the depth limit.
MaybePair limited_pair(Node c1, Node c2, const gp::Node& a, const gp::Node& b, const OperatorContext& ctx)
{
    auto k1 = within_limit(std::move(c1), ctx);
    auto k2 = within_limit(std::move(c2), ctx);
    if (!k1 && !k2) {
        return std::nullopt;
    }
    return std::pair{k1 ? std::move(*k1) : a, k2 ? std::move(*k2) : b};
}

struct Inserted {
    Node tree;
    Path at;
    std::size_t wrapped;
};

std::optional<Inserted> insert_impl(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    const auto wrappers = [&](SemType t) {
        std::vector<const PrimitiveSpec*> out;
        for (const auto* p : ctx.pset.producers(t)) {
            if (std::find(p->input_types.begin(), p->input_types.end(), t) != p->input_types.end()) {
                out.push_back(p);
            }
        }
        return out;
    };
    const auto eligible = gp::collect_paths(root, [&](const Node& n) { return !wrappers(n.type()).empty(); });
    if (eligible.empty()) {
        return std::nullopt;
    }
    const Path at = pick(eligible, rng);
    const Node& target = gp::node_at(root, at);
    const PrimitiveSpec* spec = pick(wrappers(target.type()), rng);

    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < spec->arity(); ++i) {
        if (spec->input_types[i] == target.type()) {
            slots.push_back(i);
        }
    }
    const std::size_t wrapped = pick(slots, rng);
    const int room = ctx.depth_limit - gp::level_of(at);
    std::vector<Node> children;
    for (std::size_t i = 0; i < spec->arity(); ++i) {
        if (i == wrapped) {
            children.push_back(target);
            continue;
        }
        auto arg = fresh_argument(spec->input_types[i], spec->input_fields[i], room, ctx, rng);
        if (!arg) {
            return std::nullopt;
        }
        children.push_back(std::move(*arg));
    }
    auto tree = within_limit(gp::replace_at(root, at, gp::make_node(*spec, std::move(children))), ctx);
    if (!tree) {
        return std::nullopt;
    }
    return Inserted{std::move(*tree), at, wrapped};
}

MaybeTree resample_one(const Node& root, const std::vector<Path>& candidates, const OperatorContext& ctx, Rng& rng)
{
    if (candidates.empty()) {
        return std::nullopt;
    }
    const Path at = pick(candidates, rng);
    const Node& n = gp::node_at(root, at);
    return gp::replace_at(root, at, with_value(n, ctx.pset.sample(n.type(), slot_field(root, at), rng)));
}

const std::vector<const PrimitiveSpec*>& single_layers(const gp::PrimitiveSet& pset)
{
    // Keyed by set address; sets are long-lived and non-copyable.
    thread_local const gp::PrimitiveSet* cached_for = nullptr;
    thread_local std::vector<const PrimitiveSpec*> cached;
    if (cached_for != &pset) {
        cached = primitives::single_input_layer_primitives(pset);
        cached_for = &pset;
    }
    return cached;
}

} // namespace

ParamField slot_field(const Node& root, const Path& path)
{
    if (path.empty()) {
        return ParamField::None;
    }
    const Node& parent = gp::node_at(root, parent_of(path));
    const auto& fields = parent.primitive->input_fields;
    return path.back() < fields.size() ? fields[path.back()] : ParamField::None;
}

std::vector<Path> layer_paths(const Node& root) { return paths_of_type(root, SemType::LayerUnit); }

std::vector<Path> single_input_layer_paths(const Node& root)
{
    return gp::collect_paths(root, is_single_input_layer);
}

std::vector<Path> removable_layer_paths(const Node& root)
{
    auto paths = single_input_layer_paths(root);
    std::erase_if(paths, [&](const Path& p) {
        if (p.empty() || slot_field(root, p) != ParamField::None) {
            return false;
        }
        const Node& parent = gp::node_at(root, parent_of(p));
        const Node& n = gp::node_at(root, p);
        return parent.type() == SemType::PredictionVector && n.children[layer_child_index(n)].children.empty();
    });
    return paths;
}

std::pair<Node, Node> crossover_at(const Node& a, const Path& pa, const Node& b, const Path& pb)
{
    if (gp::node_at(a, pa).type() != SemType::LayerUnit || gp::node_at(b, pb).type() != SemType::LayerUnit) {
        throw std::invalid_argument("crossover points must be LayerUnit nodes");
    }
    return {gp::replace_at(a, pa, gp::node_at(b, pb)), gp::replace_at(b, pb, gp::node_at(a, pa))};
}

std::pair<Node, Node> crossover_preserving_at(const Node& a, const Path& pa, const Node& b, const Path& pb,
                                              const gp::PrimitiveSet& pset)
{
    const PrimitiveSpec* concat = pset.find("ConcatenateLayer");
    if (concat == nullptr) {
        throw std::invalid_argument("primitive set lacks ConcatenateLayer");
    }
    const Node& sa = gp::node_at(a, pa);
    const Node& sb = gp::node_at(b, pb);
    if (sa.type() != SemType::LayerUnit || sb.type() != SemType::LayerUnit) {
        throw std::invalid_argument("crossover points must be LayerUnit nodes");
    }
    return {gp::replace_at(a, pa, gp::make_node(*concat, {sa, sb})), gp::replace_at(b, pb, gp::make_node(*concat, {sb, sa}))};
}

MaybePair crossover_one_point(const Node& a, const Node& b, const OperatorContext& ctx, Rng& rng)
{
    const auto pa = layer_paths(a);
    const auto pb = layer_paths(b);
    if (pa.empty() || pb.empty()) {
        return std::nullopt;
    }
    auto [c1, c2] = crossover_at(a, pick(pa, rng), b, pick(pb, rng));
    return limited_pair(std::move(c1), std::move(c2), a, b, ctx);
}

MaybePair crossover_ephemeral(const Node& a, const Node& b, const OperatorContext& /*ctx*/, Rng& rng)
{
    auto candidates = ephemeral_paths(a);
    rng.shuffle(candidates);
    for (const auto& pa : candidates) {
        if (auto pb = ephemeral_partner(a, pa, b, rng)) {
            const Node& na = gp::node_at(a, pa);
            const Node& nb = gp::node_at(b, *pb);
            return std::pair{gp::replace_at(a, pa, with_value(na, *nb.value)),
                             gp::replace_at(b, *pb, with_value(nb, *na.value))};
        }
    }
    return std::nullopt;
}

MaybePair crossover_subtree_preserving(const Node& a, const Node& b, const OperatorContext& ctx, Rng& rng)
{
    const auto pa = layer_paths(a);
    const auto pb = layer_paths(b);
    if (pa.empty() || pb.empty() || ctx.pset.find("ConcatenateLayer") == nullptr) {
        return std::nullopt;
    }
    auto [c1, c2] = crossover_preserving_at(a, pick(pa, rng), b, pick(pb, rng), ctx.pset);
    return limited_pair(std::move(c1), std::move(c2), a, b, ctx);
}

MaybeTree headless_chicken(const Node& a, const OperatorContext& ctx, Rng& rng)
{
    const Node fresh = gp::generate_ramped(rng, ctx.pset, kInitDepthMin, kInitDepthMax, a.type());
    auto pair = crossover_one_point(a, fresh, ctx, rng);
    if (!pair) {
        return std::nullopt;
    }
    return std::move(pair->first);
}

MaybeTree headless_chicken_ephemeral(const Node& a, const OperatorContext& ctx, Rng& rng)
{
    const Node fresh = gp::generate_ramped(rng, ctx.pset, kInitDepthMin, kInitDepthMax, a.type());
    auto pair = crossover_ephemeral(a, fresh, ctx, rng);
    if (!pair) {
        return std::nullopt;
    }
    return std::move(pair->first);
}

MaybeTree mutate_insert(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    auto ins = insert_impl(root, ctx, rng);
    if (!ins) {
        return std::nullopt;
    }
    return std::move(ins->tree);
}

MaybeTree mutate_insert_modify(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    auto ins = insert_impl(root, ctx, rng);
    if (!ins) {
        return std::nullopt;
    }
    const Node& inserted = gp::node_at(ins->tree, ins->at);
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < inserted.children.size(); ++i) {
        if (i != ins->wrapped) {
            others.push_back(i);
        }
    }
    if (others.empty()) {
        return std::move(ins->tree);
    }
    const std::size_t j = pick(others, rng);
    const Path arg = child_path(ins->at, j);
    const auto& spec = *inserted.primitive;
    auto fresh = fresh_argument(spec.input_types[j], spec.input_fields[j], ctx.depth_limit - gp::level_of(ins->at), ctx,
                                rng);
    if (!fresh) {
        return std::move(ins->tree);
    }
    return within_limit(gp::replace_at(ins->tree, arg, std::move(*fresh)), ctx);
}

MaybeTree mutate_ephemeral(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    return resample_one(root, ephemeral_paths(root), ctx, rng);
}

MaybeTree mutate_uniform(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    auto candidates = gp::collect_paths(root, [](const Node&) { return true; });
    candidates.erase(candidates.begin());
    if (candidates.empty()) {
        return std::nullopt;
    }
    const Path at = pick(candidates, rng);
    const int room = ctx.depth_limit - gp::level_of(at) + 1;
    const auto method = rng.bernoulli(0.5) ? gp::GenMethod::Grow : gp::GenMethod::Full;
    try {
        Node fresh = gp::generate_tree(rng, ctx.pset, method, 1, std::min(room, kUniformDepth),
                                       gp::node_at(root, at).type(), slot_field(root, at));
        return within_limit(gp::replace_at(root, at, std::move(fresh)), ctx);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

MaybeTree mutate_shrink(const Node& root, const OperatorContext& /*ctx*/, Rng& rng)
{
    const auto candidates = gp::collect_paths(root, [](const Node& n) {
        return std::any_of(n.children.begin(), n.children.end(), [&](const Node& c) { return c.type() == n.type(); });
    });
    if (candidates.empty()) {
        return std::nullopt;
    }
    const Path at = pick(candidates, rng);
    const Node& n = gp::node_at(root, at);
    std::vector<std::size_t> same;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (n.children[i].type() == n.type()) {
            same.push_back(i);
        }
    }
    return gp::replace_at(root, at, n.children[pick(same, rng)]);
}

Node add_layer_at(const Node& root, const Path& at, const PrimitiveSpec& layer, const OperatorContext& ctx, Rng& rng)
{
    if (gp::node_at(root, at).type() != SemType::LayerUnit) {
        throw std::invalid_argument("add_layer_at: " + gp::to_string(at) + " is not a LayerUnit node");
    }
    return gp::replace_at(root, at, primitives::fresh_layer_node(layer, gp::node_at(root, at), ctx.pset, rng));
}

Node remove_layer_at(const Node& root, const Path& at)
{
    const auto removable = removable_layer_paths(root);
    if (std::find(removable.begin(), removable.end(), at) == removable.end()) {
        throw std::invalid_argument("remove_layer_at: " + gp::to_string(at) + " is not a removable layer");
    }
    const Node& n = gp::node_at(root, at);
    return gp::replace_at(root, at, n.children[layer_child_index(n)]);
}

Node swap_layer_at(const Node& root, const Path& at, const PrimitiveSpec& layer, const OperatorContext& ctx, Rng& rng)
{
    const Node& n = gp::node_at(root, at);
    if (!is_single_input_layer(n)) {
        throw std::invalid_argument("swap_layer_at: " + gp::to_string(at) + " is not a single-input layer");
    }
    return gp::replace_at(root, at, primitives::fresh_layer_node(layer, n.children[layer_child_index(n)], ctx.pset, rng));
}

MaybeTree mutate_add_layer(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    const auto candidates = layer_paths(root);
    const auto& layers = single_layers(ctx.pset);
    if (candidates.empty() || layers.empty()) {
        return std::nullopt;
    }
    const Path& at = pick(candidates, rng);
    return within_limit(add_layer_at(root, at, *pick(layers, rng), ctx, rng), ctx);
}

MaybeTree mutate_remove_layer(const Node& root, const OperatorContext& /*ctx*/, Rng& rng)
{
    const auto candidates = removable_layer_paths(root);
    if (candidates.empty()) {
        return std::nullopt;
    }
    return remove_layer_at(root, pick(candidates, rng));
}

MaybeTree mutate_swap_layer(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    const auto candidates = single_input_layer_paths(root);
    if (candidates.empty()) {
        return std::nullopt;
    }
    const Path& at = pick(candidates, rng);
    std::vector<const PrimitiveSpec*> others;
    for (const auto* p : single_layers(ctx.pset)) {
        if (p != gp::node_at(root, at).primitive) {
            others.push_back(p);
        }
    }
    if (others.empty()) {
        return std::nullopt;
    }
    return within_limit(swap_layer_at(root, at, *pick(others, rng), ctx, rng), ctx);
}

MaybeTree mutate_activation(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    return resample_one(root, paths_of_type(root, SemType::ActivationKind), ctx, rng);
}

MaybeTree mutate_optimizer(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    return resample_one(root, paths_of_type(root, SemType::OptimizerKind), ctx, rng);
}

MaybeTree mutate_pretrained(const Node& root, const OperatorContext& ctx, Rng& rng)
{
    return resample_one(root, paths_of_type(root, SemType::PretrainedKind), ctx, rng);
}

namespace {

constexpr std::array<std::string_view, kOperatorCount> kOperatorNames = {
    "crossover",        "crossover_ephemeral", "headless_chicken", "headless_chicken_ephemeral",
    "crossover_preserving", "insert",          "insert_modify",    "ephemeral",
    "uniform",          "shrink",              "swap_layer",       "remove_layer",
    "add_layer",        "mutate_activation",   "mutate_optimizer", "mutate_pretrained",
};

} // namespace

std::string_view to_string(OperatorId op) { return kOperatorNames[static_cast<std::size_t>(op)]; }

std::optional<OperatorId> operator_from_string(std::string_view name)
{
    for (auto op : kOperators) {
        if (to_string(op) == name) {
            return op;
        }
    }
    return std::nullopt;
}

bool is_mating(OperatorId op)
{
    switch (op) {
    case OperatorId::Crossover:
    case OperatorId::CrossoverEphemeral:
    case OperatorId::HeadlessChicken:
    case OperatorId::HeadlessChickenEphemeral:
    case OperatorId::CrossoverPreserving: return true;
    default: return false;
    }
}

MaybeTree apply_operator(OperatorId op, const Node& self, const Node& mate, const OperatorContext& ctx, Rng& rng)
{
    const auto first = [](MaybePair p) -> MaybeTree {
        if (!p) {
            return std::nullopt;
        }
        return std::move(p->first);
    };
    MaybeTree out;
    switch (op) {
    case OperatorId::Crossover: out = first(crossover_one_point(self, mate, ctx, rng)); break;
    case OperatorId::CrossoverEphemeral: out = first(crossover_ephemeral(self, mate, ctx, rng)); break;
    case OperatorId::HeadlessChicken: out = headless_chicken(self, ctx, rng); break;
    case OperatorId::HeadlessChickenEphemeral: out = headless_chicken_ephemeral(self, ctx, rng); break;
    case OperatorId::CrossoverPreserving: out = first(crossover_subtree_preserving(self, mate, ctx, rng)); break;
    case OperatorId::Insert: out = mutate_insert(self, ctx, rng); break;
    case OperatorId::InsertModify: out = mutate_insert_modify(self, ctx, rng); break;
    case OperatorId::Ephemeral: out = mutate_ephemeral(self, ctx, rng); break;
    case OperatorId::Uniform: out = mutate_uniform(self, ctx, rng); break;
    case OperatorId::Shrink: out = mutate_shrink(self, ctx, rng); break;
    case OperatorId::SwapLayer: out = mutate_swap_layer(self, ctx, rng); break;
    case OperatorId::RemoveLayer: out = mutate_remove_layer(self, ctx, rng); break;
    case OperatorId::AddLayer: out = mutate_add_layer(self, ctx, rng); break;
    case OperatorId::MutateActivation: out = mutate_activation(self, ctx, rng); break;
    case OperatorId::MutateOptimizer: out = mutate_optimizer(self, ctx, rng); break;
    case OperatorId::MutatePretrained: out = mutate_pretrained(self, ctx, rng); break;
    }
    if (!out) {
        spdlog::debug("{} left its operand unchanged (no eligible point or depth limit)", to_string(op));
    }
    return out;
}

} // namespace neurotree::evolution
