#pragma once

#include "neurotree/gp/tree.hpp"

#include <string>
#include <string_view>

namespace neurotree::gp {

/// Canonical prefix rendering, e.g.
/// `NNLearner(data, DenseLayer(InputLayer(), 10, sigmoid, 0.0), adam, 4)`.
/// Structurally equal trees render byte-identically; the text doubles as
/// cache key and persistence format.
std::string to_expression(const Node& root);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset) : std::runtime_error(what), offset(offset) {}
    std::size_t offset;
};

class SyntaxError : public ParseError {
public:
    using ParseError::ParseError;
};

class UnknownPrimitive : public ParseError {
public:
    UnknownPrimitive(std::string name, std::size_t offset)
        : ParseError("unknown primitive '" + name + "' at offset " + std::to_string(offset), offset), name(std::move(name))
    {
    }
    std::string name;
};

class TypeMismatch : public ParseError {
public:
    TypeMismatch(const std::string& what, std::size_t offset, Path path) : ParseError(what, offset), path(std::move(path)) {}
    Path path;
};

/// Type-directed parse of an expression whose root must be `expected`.
/// Identifiers resolve to primitives, named terminals, or enum literals of
/// the expected slot type; numbers become Int or Float constants.
Node parse_expression(std::string_view text, const PrimitiveSet& pset,
                      SemType expected = SemType::PredictionVector);

} // namespace neurotree::gp
