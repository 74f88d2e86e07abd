#pragma once

// Recursive-descent parser for the ASCII surface syntax and the problem file
// format. Variables are declared by binders; an unbound lowercase identifier
// in term position is a constant. The identifier "x_" is reserved for the
// library's type variable and rejected.
//
// Grammar sketch (bodies of exists/forall/dexists/iota extend maximally
// right, '=' binds at the atomic level):
//
//   formula  := iff
//   iff      := implies ("iff" implies)*
//   implies  := or ("implies" implies)?
//   or       := and ("or" and)*
//   and      := unary ("and" unary)*
//   unary    := "not" unary | "dia" NUM unary | "box" NUM unary
//             | ("exists"|"forall"|"dexists") VAR "." formula
//             | primary
//   primary  := "(" formula ")" | "iota" VAR "." formula "=" term
//             | IDENT "(" term ("," term)* ")" | IDENT "=" term
//             | IDENT | IDENT-as-term "=" term
//   term     := IDENT | "iota" VAR "." formula

#include <cctype>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qml/ast.hpp"
#include "qml/print.hpp"

namespace qml {

inline const std::string kTypeVariable = "x_";

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error("syntax error at line " + std::to_string(line) +
                           ", column " + std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line, col;
};

namespace parser_detail {

enum class Tok { Ident, Number, LParen, RParen, Dot, Comma, Equal, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

class Lexer {
public:
  Lexer(const std::string& src, int first_line) : src_(src), line_(first_line) {
    advance();
  }

  const Token& peek() const { return cur_; }
  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace((unsigned char)c)) {
        ++col_;
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    int l = line_, c0 = col_;
    if (pos_ >= src_.size()) {
      cur_ = {Tok::End, "", l, c0};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha((unsigned char)c)) {
      std::string id;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_')) {
        id += src_[pos_++];
        ++col_;
      }
      cur_ = {Tok::Ident, id, l, c0};
      return;
    }
    if (std::isdigit((unsigned char)c)) {
      std::string num;
      while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) {
        num += src_[pos_++];
        ++col_;
      }
      cur_ = {Tok::Number, num, l, c0};
      return;
    }
    ++pos_;
    ++col_;
    switch (c) {
      case '(': cur_ = {Tok::LParen, "(", l, c0}; return;
      case ')': cur_ = {Tok::RParen, ")", l, c0}; return;
      case '.': cur_ = {Tok::Dot, ".", l, c0}; return;
      case ',': cur_ = {Tok::Comma, ",", l, c0}; return;
      case '=': cur_ = {Tok::Equal, "=", l, c0}; return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", l, c0);
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_;
  int col_ = 1;
  Token cur_;
};

inline bool is_keyword(const std::string& s) {
  return s == "not" || s == "and" || s == "or" || s == "implies" ||
         s == "iff" || s == "exists" || s == "forall" || s == "dexists" ||
         s == "dia" || s == "box" || s == "iota";
}

class Parser {
public:
  Parser(Arena& arena, const std::string& src, int first_line)
      : A(arena), lex_(src, first_line) {}

  FormulaRef parse_full() {
    FormulaRef f = formula();
    const Token& t = lex_.peek();
    if (t.kind != Tok::End)
      throw ParseError("unexpected trailing input '" + t.text + "'", t.line, t.col);
    return f;
  }

private:
  [[noreturn]] void fail(const std::string& msg) {
    const Token& t = lex_.peek();
    throw ParseError(msg, t.line, t.col);
  }

  Token expect(Tok k, const std::string& what) {
    if (lex_.peek().kind != k) fail("expected " + what);
    return lex_.next();
  }

  std::string expect_var() {
    Token t = expect(Tok::Ident, "a variable name");
    if (is_keyword(t.text)) throw ParseError("keyword '" + t.text + "' cannot be a variable", t.line, t.col);
    check_reserved(t);
    return t.text;
  }

  void check_reserved(const Token& t) {
    if (t.text == kTypeVariable)
      throw ParseError("identifier '" + kTypeVariable + "' is reserved", t.line, t.col);
  }

  bool peek_kw(const std::string& kw) {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }
  bool eat_kw(const std::string& kw) {
    if (peek_kw(kw)) {
      lex_.next();
      return true;
    }
    return false;
  }

  int modality_index() {
    Token t = expect(Tok::Number, "a modality index");
    long v = std::stol(t.text);
    if (v < 1) throw ParseError("modality index must be at least 1", t.line, t.col);
    return (int)v;
  }

  FormulaRef formula() { return iff(); }

  FormulaRef iff() {
    FormulaRef f = implies();
    while (eat_kw("iff")) f = A.iff(f, implies());
    return f;
  }

  FormulaRef implies() {
    FormulaRef f = disj();
    if (eat_kw("implies")) return A.implies(f, implies());
    return f;
  }

  FormulaRef disj() {
    FormulaRef f = conj();
    while (eat_kw("or")) f = A.disj(f, conj());
    return f;
  }

  FormulaRef conj() {
    FormulaRef f = unary();
    while (eat_kw("and")) f = A.conj(f, unary());
    return f;
  }

  FormulaRef unary() {
    if (eat_kw("not")) return A.neg(unary());
    if (eat_kw("dia")) {
      int m = modality_index();
      return A.dia(m, unary());
    }
    if (eat_kw("box")) {
      int m = modality_index();
      return A.box(m, unary());
    }
    if (peek_kw("exists") || peek_kw("forall") || peek_kw("dexists")) {
      std::string kw = lex_.next().text;
      std::string v = expect_var();
      expect(Tok::Dot, "'.'");
      bound_.push_back(v);
      FormulaRef body = formula();
      bound_.pop_back();
      if (kw == "exists") return A.exists(v, body);
      if (kw == "forall") return A.forall(v, body);
      return A.dexists(v, body);
    }
    return primary();
  }

  FormulaRef primary() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::LParen) {
      lex_.next();
      FormulaRef f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (peek_kw("iota")) {
      TermRef lhs = term();
      expect(Tok::Equal, "'=' after definite description");
      return A.eq(lhs, term());
    }
    if (t.kind != Tok::Ident) fail("expected a formula");
    if (is_keyword(t.text)) fail("unexpected keyword '" + t.text + "'");
    Token id = lex_.next();
    check_reserved(id);
    if (lex_.peek().kind == Tok::LParen) {
      lex_.next();
      std::vector<TermRef> args;
      if (lex_.peek().kind != Tok::RParen) {
        args.push_back(term());
        while (lex_.peek().kind == Tok::Comma) {
          lex_.next();
          args.push_back(term());
        }
      }
      expect(Tok::RParen, "')'");
      return A.atom(id.text, std::move(args));
    }
    if (lex_.peek().kind == Tok::Equal) {
      lex_.next();
      return A.eq(name_term(id), term());
    }
    // A bare identifier in formula position is a 0-ary atom.
    return A.atom(id.text, {});
  }

  TermRef term() {
    if (peek_kw("iota")) {
      lex_.next();
      std::string v = expect_var();
      expect(Tok::Dot, "'.'");
      bound_.push_back(v);
      FormulaRef body = formula();
      bound_.pop_back();
      return A.iota(v, body);
    }
    Token t = expect(Tok::Ident, "a term");
    if (is_keyword(t.text)) throw ParseError("unexpected keyword '" + t.text + "'", t.line, t.col);
    check_reserved(t);
    return name_term(t);
  }

  TermRef name_term(const Token& t) {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (*it == t.text) return A.var(t.text);
    if (std::isupper((unsigned char)t.text[0]))
      throw ParseError("constant '" + t.text + "' must be lowercase", t.line, t.col);
    return A.cst(t.text);
  }

  Arena& A;
  Lexer lex_;
  std::vector<std::string> bound_;
};

} // namespace parser_detail

inline FormulaRef parse_formula(Arena& A, const std::string& text, int first_line = 1) {
  parser_detail::Parser p(A, text, first_line);
  return p.parse_full();
}

// ---------------------------------------------------------------------------
// Problem files.

enum class LogicKind { Kn, S5, S5n };
enum class DomainKind { Constant, Expanding };
enum class TaskKind { Sat, Valid, GlobalConsequence };

struct SourceProblem {
  LogicKind logic = LogicKind::Kn;
  int n_modalities = 1;
  DomainKind domains = DomainKind::Constant;
  TaskKind task = TaskKind::Sat;
  std::vector<FormulaRef> theory;
  FormulaRef formula = nullptr;
};

namespace parser_detail {

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

} // namespace parser_detail

inline SourceProblem parse_problem(Arena& A, const std::string& text) {
  using parser_detail::strip;
  SourceProblem prob;
  std::vector<std::string> lines;
  {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
  }
  bool have_logic = false, have_formula = false;
  std::size_t i = 0;
  auto header_value = [&](const std::string& line, const std::string& key,
                          std::string& out) {
    if (line.rfind(key + ":", 0) != 0) return false;
    out = strip(line.substr(key.size() + 1));
    return true;
  };
  for (; i < lines.size(); ++i) {
    std::string line = strip(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::string v;
    if (header_value(line, "logic", v)) {
      have_logic = true;
      if (v == "s5") {
        prob.logic = LogicKind::S5;
        prob.n_modalities = 1;
      } else if (v.rfind("s5n:", 0) == 0) {
        prob.logic = LogicKind::S5n;
        prob.n_modalities = std::stoi(v.substr(4));
      } else if (v.rfind("kn:", 0) == 0) {
        prob.logic = LogicKind::Kn;
        prob.n_modalities = std::stoi(v.substr(3));
      } else {
        throw ParseError("unknown logic '" + v + "'", (int)i + 1, 1);
      }
      if (prob.n_modalities < 1)
        throw ParseError("number of modalities must be at least 1", (int)i + 1, 1);
    } else if (header_value(line, "domains", v)) {
      if (v == "constant")
        prob.domains = DomainKind::Constant;
      else if (v == "expanding")
        prob.domains = DomainKind::Expanding;
      else
        throw ParseError("unknown domains '" + v + "'", (int)i + 1, 1);
    } else if (header_value(line, "task", v)) {
      if (v == "sat")
        prob.task = TaskKind::Sat;
      else if (v == "valid")
        prob.task = TaskKind::Valid;
      else if (v == "global_consequence")
        prob.task = TaskKind::GlobalConsequence;
      else
        throw ParseError("unknown task '" + v + "'", (int)i + 1, 1);
    } else if (line == "theory:") {
      ++i;
      for (; i < lines.size(); ++i) {
        std::string tline = strip(lines[i]);
        if (tline == "formula:") break;
        if (tline.empty() || tline[0] == '#') continue;
        prob.theory.push_back(parse_formula(A, lines[i], (int)i + 1));
      }
      if (i >= lines.size())
        throw ParseError("missing 'formula:' block", (int)lines.size(), 1);
      std::string rest;
      for (std::size_t j = 0; j <= i; ++j) rest += "\n";
      for (std::size_t j = i + 1; j < lines.size(); ++j) rest += lines[j] + "\n";
      prob.formula = parse_formula(A, rest, 1);
      have_formula = true;
      i = lines.size();
      break;
    } else if (line == "formula:") {
      std::string rest;
      for (std::size_t j = 0; j <= i; ++j) rest += "\n";
      for (std::size_t j = i + 1; j < lines.size(); ++j) rest += lines[j] + "\n";
      prob.formula = parse_formula(A, rest, 1);
      have_formula = true;
      i = lines.size();
      break;
    } else {
      throw ParseError("unexpected line '" + line + "'", (int)i + 1, 1);
    }
  }
  if (!have_logic) throw ParseError("missing 'logic:' header", 1, 1);
  if (!have_formula) throw ParseError("missing 'formula:' block", (int)lines.size(), 1);
  if (!prob.theory.empty() && prob.task != TaskKind::GlobalConsequence)
    throw ParseError("a theory block requires task: global_consequence", 1, 1);
  // Validate modality indices against the declared logic.
  int n = prob.n_modalities;
  auto check_mods = [&](FormulaRef f) {
    Signature sig = signature_of(f);
    for (int m : sig.modalities)
      if (m > n)
        throw ParseError("unknown modality id " + std::to_string(m) +
                             " (logic declares " + std::to_string(n) + ")",
                         1, 1);
  };
  check_mods(prob.formula);
  for (auto* g : prob.theory) check_mods(g);
  return prob;
}

inline std::string render_problem(const SourceProblem& p) {
  std::string out = "logic: ";
  if (p.logic == LogicKind::S5)
    out += "s5";
  else if (p.logic == LogicKind::S5n)
    out += "s5n:" + std::to_string(p.n_modalities);
  else
    out += "kn:" + std::to_string(p.n_modalities);
  out += "\ndomains: ";
  out += p.domains == DomainKind::Constant ? "constant" : "expanding";
  out += "\ntask: ";
  out += p.task == TaskKind::Sat
             ? "sat"
             : (p.task == TaskKind::Valid ? "valid" : "global_consequence");
  out += "\n";
  if (!p.theory.empty()) {
    out += "theory:\n";
    for (auto* g : p.theory) out += render(g) + "\n";
  }
  out += "formula:\n" + render(p.formula) + "\n";
  return out;
}

} // namespace qml
