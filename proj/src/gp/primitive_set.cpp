#include "neurotree/gp/primitive_set.hpp"

#include <stdexcept>

namespace neurotree::gp {

namespace {

std::size_t slot(SemType t) { return static_cast<std::size_t>(t); }

} // namespace

const PrimitiveSpec& PrimitiveSet::add(PrimitiveSpec spec)
{
    if (spec.name.empty()) {
        throw std::invalid_argument("primitive name must not be empty");
    }
    if (find(spec.name) != nullptr) {
        throw std::invalid_argument("duplicate primitive name: " + spec.name);
    }
    if (spec.input_fields.empty()) {
        spec.input_fields.assign(spec.input_types.size(), ParamField::None);
    }
    if (spec.input_fields.size() != spec.input_types.size()) {
        throw std::invalid_argument("input_fields length differs from arity for " + spec.name);
    }
    if (spec.ephemeral && !spec.is_terminal()) {
        throw std::invalid_argument("ephemeral primitive must have arity 0: " + spec.name);
    }
    specs_.push_back(std::make_unique<PrimitiveSpec>(std::move(spec)));
    const PrimitiveSpec* p = specs_.back().get();
    if (p->is_terminal()) {
        terminals_[slot(p->output_type)].push_back(p);
    } else {
        producers_[slot(p->output_type)].push_back(p);
    }
    rebuild_tables();
    return *p;
}

const PrimitiveSpec& PrimitiveSet::add_terminal(std::string name, SemType type, PrimitiveKind kind, bool call_syntax)
{
    PrimitiveSpec spec;
    spec.name = std::move(name);
    spec.output_type = type;
    spec.kind = kind;
    spec.call_syntax = call_syntax;
    return add(std::move(spec));
}

const PrimitiveSpec& PrimitiveSet::add_ephemeral(SemType type)
{
    PrimitiveSpec spec;
    spec.name = "<" + std::string(to_string(type)) + ">";
    spec.output_type = type;
    spec.kind = PrimitiveKind::Arithmetic;
    spec.ephemeral = true;
    spec.call_syntax = false;
    return add(std::move(spec));
}

const PrimitiveSpec* PrimitiveSet::find(std::string_view name) const
{
    for (const auto& s : specs_) {
        if (s->name == name) {
            return s.get();
        }
    }
    return nullptr;
}

bool PrimitiveSet::contains(const PrimitiveSpec* spec) const
{
    for (const auto& s : specs_) {
        if (s.get() == spec) {
            return true;
        }
    }
    return false;
}

const std::vector<const PrimitiveSpec*>& PrimitiveSet::producers(SemType type) const { return producers_[slot(type)]; }

const std::vector<const PrimitiveSpec*>& PrimitiveSet::terminals(SemType type) const { return terminals_[slot(type)]; }

const PrimitiveSpec* PrimitiveSet::ephemeral(SemType type) const
{
    for (const auto* t : terminals_[slot(type)]) {
        if (t->ephemeral) {
            return t;
        }
    }
    return nullptr;
}

bool PrimitiveSet::realizable(SemType type, int depth) const
{
    if (depth < 1) {
        return false;
    }
    if (depth > kMaxTabulatedDepth) {
        depth = kMaxTabulatedDepth;
    }
    return realizable_[slot(type)][static_cast<std::size_t>(depth)];
}

bool PrimitiveSet::reachable(SemType type) const
{
    for (int d = 1; d <= kMaxTabulatedDepth; ++d) {
        if (realizable_[slot(type)][static_cast<std::size_t>(d)]) {
            return true;
        }
    }
    return false;
}

Constant PrimitiveSet::sample(SemType type, ParamField field, Rng& rng) const
{
    if (!sampler_) {
        throw std::logic_error("primitive set has no ephemeral sampler");
    }
    Constant c = sampler_(type, field, rng);
    if (constant_type(c) != type) {
        throw std::logic_error("ephemeral sampler returned wrong type for " + std::string(to_string(type)));
    }
    return c;
}

// realizable_[T][d]: a tree of exactly depth d with root type T exists.
// d == 1 needs a terminal; d > 1 needs a primitive whose children all fit in
// depth d-1 with at least one child reaching exactly d-1.
void PrimitiveSet::rebuild_tables()
{
    for (auto& row : realizable_) {
        row.fill(false);
    }
    for (std::size_t t = 0; t < kSemTypeCount; ++t) {
        realizable_[t][1] = !terminals_[t].empty();
    }
    for (std::size_t d = 2; d <= kMaxTabulatedDepth; ++d) {
        for (std::size_t t = 0; t < kSemTypeCount; ++t) {
            for (const auto* p : producers_[t]) {
                bool all_fit = true;
                bool one_exact = false;
                for (auto in : p->input_types) {
                    bool fits = false;
                    for (std::size_t e = 1; e < d; ++e) {
                        fits = fits || realizable_[slot(in)][e];
                    }
                    all_fit = all_fit && fits;
                    one_exact = one_exact || realizable_[slot(in)][d - 1];
                }
                if (all_fit && one_exact) {
                    realizable_[t][d] = true;
                    break;
                }
            }
        }
    }
}

} // namespace neurotree::gp
