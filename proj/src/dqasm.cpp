// Copyright 2026 The qnpusim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qnpu/dqasm.hpp"

#include <array>
#include <charconv>
#include <cctype>
#include <numbers>
#include <set>

#include "qnpu/error.hpp"

namespace qnpu::dqasm {

namespace {

struct GateInfo {
    Gate gate;
    std::string_view name;
    std::size_t arity;
    std::size_t params;
};

constexpr std::array<GateInfo, 10> kGates{{
    {Gate::H, "h", 1, 0},
    {Gate::X, "x", 1, 0},
    {Gate::Y, "y", 1, 0},
    {Gate::Z, "z", 1, 0},
    {Gate::RX, "rx", 1, 1},
    {Gate::RY, "ry", 1, 1},
    {Gate::RZ, "rz", 1, 1},
    {Gate::CNOT, "cnot", 2, 0},
    {Gate::CP, "cp", 2, 1},
    {Gate::SWAP, "swap", 2, 0},
}};

const GateInfo& info(Gate g) { return kGates[static_cast<std::size_t>(g)]; }

enum class Tok { Ident, Number, String, Symbol, Newline, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        i += n;
        col += n;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            out.push_back({Tok::Newline, "\n", line, col});
            ++i;
            ++line;
            col = 1;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        std::size_t start = i;
        std::size_t start_col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) advance(1);
            out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), line, start_col});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) advance(1);
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                advance(1);
                if (i < src.size() && (src[i] == '+' || src[i] == '-')) advance(1);
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
            }
            out.push_back({Tok::Number, std::string(src.substr(start, i - start)), line, start_col});
            continue;
        }
        if (c == '"') {
            advance(1);
            while (i < src.size() && src[i] != '"' && src[i] != '\n') advance(1);
            if (i >= src.size() || src[i] != '"') throw ParseError("unterminated string", line, start_col);
            advance(1);
            out.push_back({Tok::String, std::string(src.substr(start + 1, i - start - 2)), line, start_col});
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
            advance(2);
            out.push_back({Tok::Symbol, "->", line, start_col});
            continue;
        }
        static constexpr std::string_view kSymbols = "[](),;@*/+-";
        if (kSymbols.find(c) != std::string_view::npos) {
            advance(1);
            out.push_back({Tok::Symbol, std::string(1, c), line, start_col});
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    CircuitIR run() {
        std::size_t statements = 0;
        skip_newlines();
        while (peek().kind != Tok::End) {
            statement();
            ++statements;
            skip_newlines();
        }
        if (!blocks_.empty()) {
            const Token& t = peek();
            throw ParseError("malformed pragma: remote_begin without remote_end", t.line, t.column);
        }
        if (statements == 0) throw ParseError("empty program", 1, 1);
        return std::move(ir_);
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    void skip_newlines() {
        while (peek().kind == Tok::Newline) ++pos_;
    }

    // Newlines are insignificant except for terminating pragma lines.
    const Token& peek_sig() {
        skip_newlines();
        return peek();
    }

    [[noreturn]] void fail(const std::string& msg, const Token& t) { throw ParseError(msg, t.line, t.column); }

    void expect_symbol(std::string_view s) {
        const Token& t = peek_sig();
        if (t.kind != Tok::Symbol || t.text != s) fail("expected '" + std::string(s) + "'", t);
        ++pos_;
    }

    std::string expect_ident(const char* what) {
        const Token& t = peek_sig();
        if (t.kind != Tok::Ident) fail(std::string("expected ") + what, t);
        ++pos_;
        return t.text;
    }

    std::size_t expect_uint() {
        const Token& t = peek_sig();
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (t.kind != Tok::Number || ec != std::errc{} || p != t.text.data() + t.text.size()) fail("expected non-negative integer", t);
        ++pos_;
        return v;
    }

    std::vector<Stmt>& sink() { return blocks_.empty() ? ir_.stmts : std::get<RemoteBlock>(*blocks_.back()).body; }

    void statement() {
        const Token& t = peek();
        if (t.kind != Tok::Ident) fail("expected statement", t);
        const std::string& kw = t.text;
        if (kw == "OPENQASM") {
            ++pos_;
            const Token& v = peek_sig();
            if (v.kind != Tok::Number) fail("expected version", v);
            ++pos_;
            expect_symbol(";");
        } else if (kw == "include") {
            ++pos_;
            const Token& s = peek_sig();
            if (s.kind != Tok::String) fail("expected file name", s);
            ++pos_;
            expect_symbol(";");
        } else if (kw == "qreg") {
            ++pos_;
            qreg();
        } else if (kw == "creg") {
            ++pos_;
            creg();
        } else if (kw == "pragma") {
            ++pos_;
            pragma(t);
        } else if (kw == "teleport" || kw == "cat_ent" || kw == "cat_disent") {
            ++pos_;
            QubitRef a = qarg();
            expect_symbol(",");
            QubitRef b = qarg();
            expect_symbol(";");
            if (kw == "teleport") {
                sink().push_back(Stmt{Teleport{a, b}});
            } else if (kw == "cat_ent") {
                sink().push_back(Stmt{CatEnt{a, b}});
            } else {
                sink().push_back(Stmt{CatDisent{a, b}});
            }
        } else if (kw == "measure") {
            ++pos_;
            QubitRef q = qarg();
            expect_symbol("->");
            BitRef b;
            b.reg = expect_ident("classical register");
            expect_symbol("[");
            b.offset = expect_uint();
            expect_symbol("]");
            expect_symbol(";");
            sink().push_back(Stmt{Measure{q, b}});
        } else {
            gate(t);
        }
    }

    void qreg() {
        QuantumRegister r;
        r.name = expect_ident("register name");
        expect_symbol("[");
        r.size = expect_uint();
        expect_symbol("]");
        const Token& at = peek_sig();
        if (at.kind != Tok::Symbol || at.text != "@") fail("qreg requires an @node annotation", at);
        ++pos_;
        std::string node = expect_ident("node name");
        expect_symbol(";");
        if (r.size == 0) fail("register size must be positive", at);
        if (ir_.find_register(r.name) != nullptr) fail("duplicate register '" + r.name + "'", at);
        r.node = node_index(node);
        ir_.registers.push_back(std::move(r));
    }

    void creg() {
        ClassicalRegister r;
        const Token& t = peek_sig();
        r.name = expect_ident("register name");
        expect_symbol("[");
        r.size = expect_uint();
        expect_symbol("]");
        const Token& at = peek_sig();
        if (at.kind == Tok::Symbol && at.text == "@") fail("@node is only accepted on qreg declarations", at);
        expect_symbol(";");
        for (const auto& c : ir_.cregs) {
            if (c.name == r.name) fail("duplicate register '" + r.name + "'", t);
        }
        ir_.cregs.push_back(std::move(r));
    }

    void pragma(const Token& kw) {
        // Pragmas are line-terminated; a trailing ';' is tolerated.
        const Token& what = peek();
        if (what.kind != Tok::Ident) fail("malformed pragma", kw);
        ++pos_;
        if (what.text == "remote_begin") {
            const Token& n = peek();
            if (n.kind != Tok::Ident) fail("malformed pragma: remote_begin needs a node name", what);
            ++pos_;
            if (!blocks_.empty()) fail("malformed pragma: nested remote blocks", what);
            std::size_t node = kUnresolved;
            for (const auto& nd : ir_.nodes) {
                if (nd.name == n.text) node = nd.index;
            }
            if (node == kUnresolved) fail("malformed pragma: unknown node '" + n.text + "'", n);
            sink().push_back(Stmt{RemoteBlock{node, {}}});
            blocks_.push_back(&sink().back().value);
        } else if (what.text == "remote_end") {
            if (blocks_.empty()) fail("malformed pragma: remote_end without remote_begin", what);
            blocks_.pop_back();
        } else {
            fail("malformed pragma: unknown directive '" + what.text + "'", what);
        }
        end_of_line(kw);
    }

    void end_of_line(const Token& kw) {
        if (peek().kind == Tok::Symbol && peek().text == ";") ++pos_;
        if (peek().kind != Tok::Newline && peek().kind != Tok::End) fail("malformed pragma: trailing tokens", kw);
    }

    void gate(const Token& t) {
        auto g = gate_from_name(t.text);
        if (!g) fail("unknown gate '" + t.text + "'", t);
        ++pos_;
        LocalGate lg;
        lg.gate = *g;
        const Token& p = peek_sig();
        if (p.kind == Tok::Symbol && p.text == "(") {
            ++pos_;
            lg.params.push_back(expr());
            while (peek_sig().kind == Tok::Symbol && peek().text == ",") {
                ++pos_;
                lg.params.push_back(expr());
            }
            expect_symbol(")");
        }
        if (lg.params.size() != info(*g).params) fail("wrong parameter count for '" + t.text + "'", t);
        lg.qubits.push_back(qarg());
        while (peek_sig().kind == Tok::Symbol && peek().text == ",") {
            ++pos_;
            lg.qubits.push_back(qarg());
        }
        expect_symbol(";");
        if (lg.qubits.size() != info(*g).arity) fail("wrong operand count for '" + t.text + "'", t);
        sink().push_back(Stmt{std::move(lg)});
    }

    QubitRef qarg() {
        QubitRef q;
        q.reg = expect_ident("qubit register");
        expect_symbol("[");
        q.offset = expect_uint();
        expect_symbol("]");
        if (const auto* r = ir_.find_register(q.reg)) q.node = r->node;
        return q;
    }

    double expr() {
        double v = term();
        while (peek_sig().kind == Tok::Symbol && (peek().text == "+" || peek().text == "-")) {
            bool plus = next().text == "+";
            double r = term();
            v = plus ? v + r : v - r;
        }
        return v;
    }

    double term() {
        double v = factor();
        while (peek_sig().kind == Tok::Symbol && (peek().text == "*" || peek().text == "/")) {
            bool mul = next().text == "*";
            double r = factor();
            v = mul ? v * r : v / r;
        }
        return v;
    }

    double factor() {
        const Token& t = peek_sig();
        if (t.kind == Tok::Symbol && t.text == "-") {
            ++pos_;
            return -factor();
        }
        if (t.kind == Tok::Symbol && t.text == "(") {
            ++pos_;
            double v = expr();
            expect_symbol(")");
            return v;
        }
        if (t.kind == Tok::Ident && t.text == "pi") {
            ++pos_;
            return std::numbers::pi;
        }
        if (t.kind == Tok::Number) {
            double v = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc{} || p != t.text.data() + t.text.size()) fail("malformed number", t);
            ++pos_;
            return v;
        }
        fail("expected angle expression", t);
    }

    std::size_t node_index(const std::string& name) {
        for (const auto& n : ir_.nodes) {
            if (n.name == name) return n.index;
        }
        ir_.nodes.push_back(NodeId{name, ir_.nodes.size()});
        return ir_.nodes.size() - 1;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    CircuitIR ir_;
    std::vector<decltype(Stmt::value)*> blocks_;
};

void check_ref(const CircuitIR& ir, const QubitRef& q) {
    const QuantumRegister* r = ir.find_register(q.reg);
    if (r == nullptr || q.node == kUnresolved) {
        throw ValidationError("qubit " + q.reg + "[" + std::to_string(q.offset) + "] used before declaration");
    }
    if (q.offset >= r->size) {
        throw ValidationError("qubit " + q.reg + "[" + std::to_string(q.offset) + "] out of range");
    }
    if (q.node != r->node) throw ValidationError("qubit " + q.reg + " home node does not match its declaration");
}

std::string ref_text(const QubitRef& q) { return q.reg + "[" + std::to_string(q.offset) + "]"; }

void validate_stmts(const CircuitIR& ir, const std::vector<Stmt>& stmts, std::optional<std::size_t> block_node,
                    ParseMode mode, ValidationReport& rep) {
    auto in_block = [&](const QubitRef& q) {
        if (block_node && q.node != *block_node) {
            throw ValidationError("remote block on " + ir.nodes[*block_node].name + " touches foreign qubit " + ref_text(q));
        }
    };
    for (const auto& s : stmts) {
        std::visit(
            [&](const auto& st) {
                using T = std::decay_t<decltype(st)>;
                if constexpr (std::is_same_v<T, LocalGate>) {
                    if (st.qubits.size() != gate_arity(st.gate) || st.params.size() != gate_param_count(st.gate)) {
                        throw ValidationError("malformed " + std::string(gate_name(st.gate)) + " statement");
                    }
                    for (const auto& q : st.qubits) {
                        check_ref(ir, q);
                        in_block(q);
                    }
                    if (st.qubits.size() == 2) {
                        if (st.qubits[0] == st.qubits[1]) throw ValidationError("two-qubit gate on a single qubit " + ref_text(st.qubits[0]));
                        if (st.qubits[0].node != st.qubits[1].node) {
                            if (mode == ParseMode::Strict) {
                                throw ValidationError("cross-node gate " + std::string(gate_name(st.gate)) + " " +
                                                      ref_text(st.qubits[0]) + ", " + ref_text(st.qubits[1]) +
                                                      " requires an explicit protocol in strict mode");
                            }
                            ++rep.cross_node_gates;
                        }
                    }
                } else if constexpr (std::is_same_v<T, Teleport> || std::is_same_v<T, CatEnt>) {
                    check_ref(ir, st.src);
                    check_ref(ir, st.dst);
                    in_block(st.src);
                    in_block(st.dst);
                    if (st.src.node == st.dst.node) {
                        throw ValidationError(std::string(std::is_same_v<T, Teleport> ? "teleport" : "cat_ent") +
                                              " endpoints on the same node: " + ref_text(st.src) + ", " + ref_text(st.dst));
                    }
                } else if constexpr (std::is_same_v<T, CatDisent>) {
                    check_ref(ir, st.remote);
                    check_ref(ir, st.home);
                    in_block(st.remote);
                    in_block(st.home);
                    if (st.remote.node == st.home.node) throw ValidationError("cat_disent endpoints on the same node");
                } else if constexpr (std::is_same_v<T, Measure>) {
                    check_ref(ir, st.qubit);
                    in_block(st.qubit);
                    bool found = false;
                    for (const auto& c : ir.cregs) {
                        if (c.name == st.bit.reg) {
                            found = true;
                            if (st.bit.offset >= c.size) throw ValidationError("classical bit out of range: " + st.bit.reg);
                        }
                    }
                    if (!found) throw ValidationError("classical register used before declaration: " + st.bit.reg);
                } else if constexpr (std::is_same_v<T, RemoteBlock>) {
                    if (block_node) throw ValidationError("nested remote block");
                    if (st.node >= ir.nodes.size()) throw ValidationError("remote block names an unknown node");
                    validate_stmts(ir, st.body, st.node, mode, rep);
                }
            },
            s.value);
    }
}

void emit_stmts(const CircuitIR& ir, const std::vector<Stmt>& stmts, std::string& out) {
    auto q = [](const QubitRef& r) { return ref_text(r); };
    for (const auto& s : stmts) {
        std::visit(
            [&](const auto& st) {
                using T = std::decay_t<decltype(st)>;
                if constexpr (std::is_same_v<T, LocalGate>) {
                    out += gate_name(st.gate);
                    if (!st.params.empty()) {
                        out += '(';
                        for (std::size_t i = 0; i < st.params.size(); ++i) {
                            if (i) out += ", ";
                            out += format_angle(st.params[i]);
                        }
                        out += ')';
                    }
                    out += ' ';
                    for (std::size_t i = 0; i < st.qubits.size(); ++i) {
                        if (i) out += ", ";
                        out += q(st.qubits[i]);
                    }
                    out += ";\n";
                } else if constexpr (std::is_same_v<T, Teleport>) {
                    out += "teleport " + q(st.src) + ", " + q(st.dst) + ";\n";
                } else if constexpr (std::is_same_v<T, CatEnt>) {
                    out += "cat_ent " + q(st.src) + ", " + q(st.dst) + ";\n";
                } else if constexpr (std::is_same_v<T, CatDisent>) {
                    out += "cat_disent " + q(st.remote) + ", " + q(st.home) + ";\n";
                } else if constexpr (std::is_same_v<T, Measure>) {
                    out += "measure " + q(st.qubit) + " -> " + st.bit.reg + "[" + std::to_string(st.bit.offset) + "];\n";
                } else if constexpr (std::is_same_v<T, RemoteBlock>) {
                    out += "pragma remote_begin " + ir.nodes[st.node].name + "\n";
                    emit_stmts(ir, st.body, out);
                    out += "pragma remote_end\n";
                }
            },
            s.value);
    }
}

}  // namespace

std::string_view gate_name(Gate g) { return info(g).name; }

std::optional<Gate> gate_from_name(std::string_view name) {
    for (const auto& g : kGates) {
        if (g.name == name) return g.gate;
    }
    if (name == "cx") return Gate::CNOT;
    return std::nullopt;
}

std::size_t gate_arity(Gate g) { return info(g).arity; }
std::size_t gate_param_count(Gate g) { return info(g).params; }

const QuantumRegister* CircuitIR::find_register(std::string_view name) const {
    for (const auto& r : registers) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

std::size_t CircuitIR::node_qubit_count(std::size_t node) const {
    std::size_t n = 0;
    for (const auto& r : registers) {
        if (r.node == node) n += r.size;
    }
    return n;
}

std::size_t CircuitIR::local_index(const QubitRef& q) const {
    std::size_t base = 0;
    for (const auto& r : registers) {
        if (r.name == q.reg) return base + q.offset;
        if (r.node == q.node) base += r.size;
    }
    throw ValidationError("unknown register " + q.reg);
}

CircuitIR parse(const SourceProgram& src) { return Parser(lex(src.text)).run(); }

ValidationReport validate(const CircuitIR& ir, ParseMode mode) {
    ValidationReport rep;
    for (std::size_t i = 0; i < ir.nodes.size(); ++i) {
        if (ir.nodes[i].index != i) throw ValidationError("node indices are not dense");
        for (std::size_t j = 0; j < i; ++j) {
            if (ir.nodes[j].name == ir.nodes[i].name) throw ValidationError("duplicate node name " + ir.nodes[i].name);
        }
    }
    for (const auto& r : ir.registers) {
        if (r.node >= ir.nodes.size()) throw ValidationError("register " + r.name + " names an unknown node");
    }
    rep.node_count = ir.nodes.size();
    rep.qubits_per_node.resize(ir.nodes.size());
    for (std::size_t i = 0; i < ir.nodes.size(); ++i) rep.qubits_per_node[i] = ir.node_qubit_count(i);
    validate_stmts(ir, ir.stmts, std::nullopt, mode, rep);
    return rep;
}

SourceProgram emit(const CircuitIR& ir) {
    std::string out;
    for (const auto& r : ir.registers) {
        out += "qreg " + r.name + "[" + std::to_string(r.size) + "] @" + ir.nodes[r.node].name + ";\n";
    }
    for (const auto& c : ir.cregs) out += "creg " + c.name + "[" + std::to_string(c.size) + "];\n";
    emit_stmts(ir, ir.stmts, out);
    return SourceProgram{std::move(out), "<emit>"};
}

std::string format_angle(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), p);
}

}  // namespace qnpu::dqasm
