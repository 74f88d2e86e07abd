#pragma once

// Pretty-printer for the ASCII surface syntax. parse(render(f)) rebuilds f
// node for node. Box, forall, or and implies are recovered from their
// desugared shapes so common formulas stay readable; iff is printed expanded.

#include <sstream>
#include <string>

#include "qml/ast.hpp"

namespace qml {

namespace printer_detail {

struct Out {
  std::string text;
  bool open_tail = false; // ends inside a binder body, swallows what follows
};

inline Out render_rec(FormulaRef f, int min_prec);

inline std::string render_term(TermRef t) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Const:
      return t->name;
    case TermKind::Iota: {
      // An equality body is wrapped so the '=' is not taken by the caller.
      if (t->body->kind == FormulaKind::Eq) {
        Out b = render_rec(t->body, 0);
        return "iota " + t->name + ". (" + b.text + ")";
      }
      Out b = render_rec(t->body, 0);
      return "iota " + t->name + ". " + b.text;
    }
  }
  return {};
}

inline Out paren(Out o) { return {"(" + o.text + ")", false}; }

inline Out close(Out o, int prec, int min_prec) {
  if (prec < min_prec) return paren(std::move(o));
  return o;
}

// Precedences: iff 1 < implies 2 < or 3 < and 4 < unary 5 < atom 6.
inline Out render_rec(FormulaRef f, int min_prec) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::string s = f->pred;
      if (!f->terms.empty()) {
        s += "(";
        for (std::size_t i = 0; i < f->terms.size(); ++i) {
          if (i) s += ", ";
          s += render_term(f->terms[i]);
        }
        s += ")";
      }
      return {s, false};
    }
    case FormulaKind::Eq: {
      // A trailing iota body keeps absorbing connectives to its right.
      bool tail = f->terms[1]->kind == TermKind::Iota;
      return {render_term(f->terms[0]) + " = " + render_term(f->terms[1]), tail};
    }
    case FormulaKind::Exists:
    case FormulaKind::DExists: {
      Out b = render_rec(f->lhs, 0);
      const char* kw = f->kind == FormulaKind::Exists ? "exists " : "dexists ";
      Out o{kw + f->var + ". " + b.text, true};
      if (min_prec > 0) return paren(std::move(o));
      return o;
    }
    case FormulaKind::Dia: {
      Out b = render_rec(f->lhs, 5);
      Out o{"dia " + std::to_string(f->modality) + " " + b.text, b.open_tail};
      return close(std::move(o), 5, min_prec);
    }
    case FormulaKind::And: {
      // or / implies sugar over the double-negation shapes
      FormulaRef l = f->lhs, r = f->rhs;
      Out ol = render_rec(l, 4);
      if (ol.open_tail) ol = paren(std::move(ol));
      Out orr = render_rec(r, 5); // right child of and must bind tighter
      Out o{ol.text + " and " + orr.text, orr.open_tail};
      return close(std::move(o), 4, min_prec);
    }
    case FormulaKind::Not: {
      FormulaRef a = f->lhs;
      // forall v. b  ==  not exists v. not b
      if (a->kind == FormulaKind::Exists && a->lhs->kind == FormulaKind::Not) {
        Out b = render_rec(a->lhs->lhs, 0);
        Out o{"forall " + a->var + ". " + b.text, true};
        if (min_prec > 0) return paren(std::move(o));
        return o;
      }
      // box m b  ==  not dia m not b
      if (a->kind == FormulaKind::Dia && a->lhs->kind == FormulaKind::Not) {
        Out b = render_rec(a->lhs->lhs, 5);
        Out o{"box " + std::to_string(a->modality) + " " + b.text, b.open_tail};
        return close(std::move(o), 5, min_prec);
      }
      if (a->kind == FormulaKind::And) {
        FormulaRef l = a->lhs, r = a->rhs;
        // l or r  ==  not (not l and not r)
        if (l->kind == FormulaKind::Not && r->kind == FormulaKind::Not) {
          Out ol = render_rec(l->lhs, 4);
          if (ol.open_tail) ol = paren(std::move(ol));
          Out orr = render_rec(r->lhs, 4);
          Out o{ol.text + " or " + orr.text, orr.open_tail};
          return close(std::move(o), 3, min_prec);
        }
        // l implies r  ==  not (l and not r)
        if (r->kind == FormulaKind::Not) {
          Out ol = render_rec(l, 3);
          if (ol.open_tail) ol = paren(std::move(ol));
          Out orr = render_rec(r->lhs, 3);
          Out o{ol.text + " implies " + orr.text, orr.open_tail};
          return close(std::move(o), 2, min_prec);
        }
      }
      Out b = render_rec(a, 5);
      Out o{"not " + b.text, b.open_tail};
      return close(std::move(o), 5, min_prec);
    }
  }
  return {};
}

} // namespace printer_detail

inline std::string render(FormulaRef f) {
  return printer_detail::render_rec(f, 0).text;
}

inline std::string render(TermRef t) { return printer_detail::render_term(t); }

} // namespace qml
