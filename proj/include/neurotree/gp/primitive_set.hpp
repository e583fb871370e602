#pragma once

#include "neurotree/gp/types.hpp"
#include "neurotree/rng.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace neurotree::gp {

enum class PrimitiveKind : std::uint8_t { Preprocess, Layer, Learner, Arithmetic };

struct PrimitiveSpec {
    std::string name;
    std::vector<SemType> input_types;
    /// One entry per input; ParamField::None where no sampling domain applies.
    std::vector<ParamField> input_fields;
    SemType output_type = SemType::Int;
    PrimitiveKind kind = PrimitiveKind::Arithmetic;
    /// Ephemeral terminals carry a sampled constant and render as a literal.
    bool ephemeral = false;
    /// Render as `Name()` even at arity 0 (e.g. InputLayer()).
    bool call_syntax = true;

    std::size_t arity() const { return input_types.size(); }
    bool is_terminal() const { return input_types.empty(); }
};

/// Samples a constant for an ephemeral slot of the given type and field.
using EphemeralSampler = std::function<Constant(SemType, ParamField, Rng&)>;

/// Registry of primitives, terminals and ephemerals. Trees hold pointers into
/// it, so a set must outlive every tree built from it; it is not copyable.
class PrimitiveSet {
public:
    /// Depth up to which realizable tree depths are tabulated per type.
    static constexpr int kMaxTabulatedDepth = 48;

    PrimitiveSet() = default;
    PrimitiveSet(const PrimitiveSet&) = delete;
    PrimitiveSet& operator=(const PrimitiveSet&) = delete;
    PrimitiveSet(PrimitiveSet&&) = default;
    PrimitiveSet& operator=(PrimitiveSet&&) = default;

    const PrimitiveSpec& add(PrimitiveSpec spec);
    const PrimitiveSpec& add_terminal(std::string name, SemType type, PrimitiveKind kind, bool call_syntax = false);
    /// Ephemeral terminal for `type`; its name is the type name in angle brackets.
    const PrimitiveSpec& add_ephemeral(SemType type);

    const PrimitiveSpec* find(std::string_view name) const;
    bool contains(const PrimitiveSpec* spec) const;

    /// Non-terminal primitives whose output is `type`.
    const std::vector<const PrimitiveSpec*>& producers(SemType type) const;
    /// Terminals (named and ephemeral) whose output is `type`.
    const std::vector<const PrimitiveSpec*>& terminals(SemType type) const;
    const PrimitiveSpec* ephemeral(SemType type) const;

    /// True when some type-sound tree of exactly `depth` has root type `type`.
    bool realizable(SemType type, int depth) const;
    /// True when any primitive or terminal produces `type`.
    bool reachable(SemType type) const;

    void set_sampler(EphemeralSampler sampler) { sampler_ = std::move(sampler); }
    Constant sample(SemType type, ParamField field, Rng& rng) const;

    std::span<const std::unique_ptr<PrimitiveSpec>> all() const { return specs_; }

private:
    void rebuild_tables();

    std::vector<std::unique_ptr<PrimitiveSpec>> specs_;
    std::array<std::vector<const PrimitiveSpec*>, kSemTypeCount> producers_;
    std::array<std::vector<const PrimitiveSpec*>, kSemTypeCount> terminals_;
    std::array<std::array<bool, kMaxTabulatedDepth + 1>, kSemTypeCount> realizable_{};
    EphemeralSampler sampler_;
};

} // namespace neurotree::gp
