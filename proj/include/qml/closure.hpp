#pragma once

// Subformula closures and the surrogate translation. For a one-variable
// sentence phi, sub_x_closure(phi) is the set { psi{x/y}, not psi{x/y} }
// over subformulas psi(y) of phi, with the library's reserved type variable
// substituted for the single free variable. Members are kept in first-visit
// order; that order is the canonical enumeration every later module indexes.

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "qml/ast.hpp"
#include "qml/parse.hpp"
#include "qml/print.hpp"

namespace qml {

struct FragmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace closure_detail {

inline void subformulas_term(TermRef t, std::vector<FormulaRef>& out,
                             std::unordered_map<FormulaRef, bool>& seen);

inline void subformulas_rec(FormulaRef f, std::vector<FormulaRef>& out,
                            std::unordered_map<FormulaRef, bool>& seen) {
  if (seen.count(f)) return;
  seen[f] = true;
  out.push_back(f);
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq:
      for (auto* t : f->terms) subformulas_term(t, out, seen);
      break;
    case FormulaKind::Not:
    case FormulaKind::Exists:
    case FormulaKind::DExists:
    case FormulaKind::Dia:
      subformulas_rec(f->lhs, out, seen);
      break;
    case FormulaKind::And:
      subformulas_rec(f->lhs, out, seen);
      subformulas_rec(f->rhs, out, seen);
      break;
  }
}

inline void subformulas_term(TermRef t, std::vector<FormulaRef>& out,
                             std::unordered_map<FormulaRef, bool>& seen) {
  if (t->kind == TermKind::Iota) subformulas_rec(t->body, out, seen);
}

} // namespace closure_detail

// All formula subformulas in first-visit (pre-)order, descending through
// definite-description bodies.
inline std::vector<FormulaRef> subformulas(FormulaRef f) {
  std::vector<FormulaRef> out;
  std::unordered_map<FormulaRef, bool> seen;
  closure_detail::subformulas_rec(f, out, seen);
  return out;
}

inline std::vector<FormulaRef> sub_x_closure(Arena& A, FormulaRef phi) {
  if (!free_vars(phi).empty())
    throw FragmentError("sub_x_closure requires a sentence");
  TermRef xvar = A.var(kTypeVariable);
  std::vector<FormulaRef> out;
  std::unordered_map<FormulaRef, bool> seen;
  auto add = [&](FormulaRef g) {
    if (!seen.count(g)) {
      seen[g] = true;
      out.push_back(g);
    }
  };
  for (FormulaRef psi : subformulas(phi)) {
    auto fv = free_vars(psi);
    if (fv.size() > 1)
      throw FragmentError("sub_x_closure: subformula with two free variables: " + render(psi));
    FormulaRef norm = fv.empty() ? psi : substitute(A, psi, *fv.begin(), xvar);
    add(norm);
    add(A.neg(norm));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Surrogates: outermost diamond subformulas replaced by reserved predicates.
// Names are a stable function of the replaced subformula's canonical form.

namespace closure_detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex12(std::uint64_t v) {
  static const char* d = "0123456789abcdef";
  std::string s;
  for (int i = 11; i >= 0; --i) s += d[(v >> (4 * i)) & 0xf];
  return s;
}

} // namespace closure_detail

// Stable reserved name for the surrogate of a diamond formula. The free
// variable (if any) is normalized to the type variable first, so the name
// does not depend on the caller's variable naming.
inline std::string surrogate_name(Arena& A, FormulaRef dia_formula) {
  auto fv = free_vars(dia_formula);
  FormulaRef norm = dia_formula;
  if (!fv.empty()) norm = substitute(A, dia_formula, *fv.begin(), A.var(kTypeVariable));
  std::string prefix = fv.empty() ? "sur0_" : "sur_";
  return prefix + closure_detail::hex12(closure_detail::fnv1a(render(norm)));
}

namespace closure_detail {

inline TermRef surrogate_term(Arena& A, TermRef t);

inline FormulaRef surrogate_rec(Arena& A, FormulaRef f) {
  switch (f->kind) {
    case FormulaKind::Dia: {
      auto fv = free_vars(f);
      if (fv.size() > 1) throw FragmentError("surrogate requires a monodic formula");
      std::string name = surrogate_name(A, f);
      if (fv.empty()) return A.atom(name, {});
      return A.atom(name, {A.var(*fv.begin())});
    }
    case FormulaKind::Atom: {
      std::vector<TermRef> ts;
      for (auto* t : f->terms) ts.push_back(surrogate_term(A, t));
      return A.atom(f->pred, std::move(ts));
    }
    case FormulaKind::Eq:
      return A.eq(surrogate_term(A, f->terms[0]), surrogate_term(A, f->terms[1]));
    case FormulaKind::Not:
      return A.neg(surrogate_rec(A, f->lhs));
    case FormulaKind::And:
      return A.conj(surrogate_rec(A, f->lhs), surrogate_rec(A, f->rhs));
    case FormulaKind::Exists:
      return A.exists(f->var, surrogate_rec(A, f->lhs));
    case FormulaKind::DExists:
      return A.dexists(f->var, surrogate_rec(A, f->lhs));
  }
  return f;
}

inline TermRef surrogate_term(Arena& A, TermRef t) {
  if (t->kind == TermKind::Iota) return A.iota(t->name, surrogate_rec(A, t->body));
  return t;
}

} // namespace closure_detail

inline FormulaRef surrogate(Arena& A, FormulaRef f) {
  if (!subformulas_monodic(f)) throw FragmentError("surrogate requires a monodic formula");
  return closure_detail::surrogate_rec(A, f);
}

} // namespace qml
