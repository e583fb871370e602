#include "neurotree/gp/expression.hpp"

#include <cctype>
#include <charconv>

namespace neurotree::gp {

namespace {

void render(const Node& n, std::string& out)
{
    if (n.value) {
        out += render_constant(*n.value);
        return;
    }
    out += n.primitive->name;
    if (n.children.empty()) {
        if (n.primitive->call_syntax) {
            out += "()";
        }
        return;
    }
    out += '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        render(n.children[i], out);
    }
    out += ')';
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::optional<Constant> enum_literal(SemType type, std::string_view name)
{
    switch (type) {
    case SemType::ActivationKind:
        if (auto a = activation_from_string(name)) {
            return *a;
        }
        break;
    case SemType::OptimizerKind:
        if (auto o = optimizer_from_string(name)) {
            return *o;
        }
        break;
    case SemType::PaddingKind:
        if (auto p = padding_from_string(name)) {
            return *p;
        }
        break;
    case SemType::PretrainedKind:
        if (auto p = pretrained_from_string(name)) {
            return *p;
        }
        break;
    default: break;
    }
    return std::nullopt;
}

std::optional<SemType> enum_literal_type(std::string_view name)
{
    for (auto t : {SemType::ActivationKind, SemType::OptimizerKind, SemType::PaddingKind, SemType::PretrainedKind}) {
        if (enum_literal(t, name)) {
            return t;
        }
    }
    return std::nullopt;
}

class Parser {
public:
    Parser(std::string_view text, const PrimitiveSet& pset) : text_(text), pset_(pset) {}

    Node parse_root(SemType expected)
    {
        Path path;
        Node root = parse_node(expected, path);
        skip_ws();
        if (pos_ != text_.size()) {
            throw SyntaxError("unexpected trailing input at offset " + std::to_string(pos_), pos_);
        }
        return root;
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool peek(char c)
    {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c, const std::string& context)
    {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            throw SyntaxError("expected '" + std::string(1, c) + "' " + context + " at offset " + std::to_string(pos_),
                              pos_);
        }
        ++pos_;
    }

    TypeMismatch mismatch(std::size_t at, const Path& path, SemType expected, const std::string& got)
    {
        return TypeMismatch(got + " where " + std::string(to_string(expected)) + " is expected at " + to_string(path) +
                                " (offset " + std::to_string(at) + ")",
                            at, path);
    }

    Node parse_node(SemType expected, Path& path)
    {
        skip_ws();
        if (pos_ >= text_.size()) {
            throw SyntaxError("unexpected end of expression at offset " + std::to_string(pos_), pos_);
        }
        const std::size_t start = pos_;
        const char c = text_[pos_];
        if (is_ident_start(c)) {
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
                ++pos_;
            }
            std::string name(text_.substr(start, pos_ - start));
            if (peek('(')) {
                return parse_call(name, start, expected, path);
            }
            return parse_bare(name, start, expected, path);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            return parse_number(start, expected, path);
        }
        throw SyntaxError("unexpected character '" + std::string(1, c) + "' at offset " + std::to_string(pos_), pos_);
    }

    Node parse_call(const std::string& name, std::size_t start, SemType expected, Path& path)
    {
        const PrimitiveSpec* spec = pset_.find(name);
        if (spec == nullptr || spec->ephemeral) {
            throw UnknownPrimitive(name, start);
        }
        if (spec->output_type != expected) {
            throw mismatch(start, path, expected, name + " (" + std::string(to_string(spec->output_type)) + ")");
        }
        expect('(', "after " + name);
        std::vector<Node> children;
        for (std::size_t i = 0; i < spec->arity(); ++i) {
            if (i > 0) {
                if (peek(')')) {
                    throw SyntaxError(name + " takes " + std::to_string(spec->arity()) + " arguments, got " +
                                          std::to_string(i) + " (offset " + std::to_string(pos_) + ")",
                                      pos_);
                }
                expect(',', "between arguments of " + name);
            } else if (peek(')')) {
                throw SyntaxError(name + " takes " + std::to_string(spec->arity()) + " arguments, got 0 (offset " +
                                      std::to_string(pos_) + ")",
                                  pos_);
            }
            path.push_back(i);
            children.push_back(parse_node(spec->input_types[i], path));
            path.pop_back();
        }
        if (peek(',')) {
            throw SyntaxError(name + " takes " + std::to_string(spec->arity()) + " arguments, got more (offset " +
                                  std::to_string(pos_) + ")",
                              pos_);
        }
        expect(')', "closing " + name);
        return make_node(*spec, std::move(children));
    }

    Node parse_bare(const std::string& name, std::size_t start, SemType expected, const Path& path)
    {
        if (const PrimitiveSpec* spec = pset_.find(name); spec != nullptr && !spec->ephemeral) {
            if (!spec->is_terminal()) {
                throw SyntaxError(name + " requires arguments (offset " + std::to_string(pos_) + ")", pos_);
            }
            if (spec->output_type != expected) {
                throw mismatch(start, path, expected, name + " (" + std::string(to_string(spec->output_type)) + ")");
            }
            return make_terminal(*spec);
        }
        if (auto value = enum_literal(expected, name)) {
            const PrimitiveSpec* eph = pset_.ephemeral(expected);
            if (eph == nullptr) {
                throw mismatch(start, path, expected, "literal " + name);
            }
            return make_constant(*eph, *value);
        }
        if (auto other = enum_literal_type(name)) {
            throw mismatch(start, path, expected, name + " (" + std::string(to_string(*other)) + ")");
        }
        throw UnknownPrimitive(name, start);
    }

    Node parse_number(std::size_t start, SemType expected, const Path& path)
    {
        std::size_t end = pos_;
        if (end < text_.size() && (text_[end] == '-' || text_[end] == '+')) {
            ++end;
        }
        bool is_float = false;
        while (end < text_.size()) {
            char ch = text_[end];
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                ++end;
            } else if (ch == '.' || ch == 'e' || ch == 'E') {
                is_float = true;
                ++end;
                if ((ch == 'e' || ch == 'E') && end < text_.size() && (text_[end] == '-' || text_[end] == '+')) {
                    ++end;
                }
            } else {
                break;
            }
        }
        std::string_view literal = text_.substr(start, end - start);
        const char* first = literal.data() + (literal.front() == '+' ? 1 : 0);
        const char* last = literal.data() + literal.size();
        pos_ = end;

        if (expected == SemType::Int) {
            if (is_float) {
                throw mismatch(start, path, expected, "float literal " + std::string(literal));
            }
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || p != last) {
                throw SyntaxError("malformed integer '" + std::string(literal) + "' at offset " + std::to_string(start),
                                  start);
            }
            return make_constant(*require_ephemeral(expected, start, path), v);
        }
        if (expected == SemType::Float) {
            double v = 0;
            auto [p, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || p != last) {
                throw SyntaxError("malformed number '" + std::string(literal) + "' at offset " + std::to_string(start),
                                  start);
            }
            return make_constant(*require_ephemeral(expected, start, path), v);
        }
        throw mismatch(start, path, expected, "number " + std::string(literal));
    }

    const PrimitiveSpec* require_ephemeral(SemType type, std::size_t at, const Path& path)
    {
        const PrimitiveSpec* eph = pset_.ephemeral(type);
        if (eph == nullptr) {
            throw mismatch(at, path, type, "literal");
        }
        return eph;
    }

    std::string_view text_;
    const PrimitiveSet& pset_;
    std::size_t pos_ = 0;
};

} // namespace

std::string to_expression(const Node& root)
{
    std::string out;
    render(root, out);
    return out;
}

Node parse_expression(std::string_view text, const PrimitiveSet& pset, SemType expected)
{
    return Parser(text, pset).parse_root(expected);
}

} // namespace neurotree::gp
