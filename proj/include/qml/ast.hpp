#pragma once

// Terms and formulas of first-order modal logic with equality, constants and
// definite descriptions, plus the difference quantifier used by the
// elsewhere-translation. Nodes are hash-consed in an arena, so pointer
// equality coincides with structural equality (double negation is collapsed
// at construction; nothing else is normalized).

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace qml {

class Formula;
class Term;
using FormulaRef = const Formula*;
using TermRef = const Term*;

enum class TermKind { Var, Const, Iota };
enum class FormulaKind { Atom, Eq, Not, And, Exists, DExists, Dia };

class Term {
public:
  TermKind kind;
  std::string name;   // Var / Const name, or the iota-bound variable
  FormulaRef body = nullptr; // Iota only

  std::size_t hash = 0;
};

class Formula {
public:
  FormulaKind kind;
  std::string pred;              // Atom: predicate name
  std::vector<TermRef> terms;    // Atom args, or Eq {lhs, rhs}
  FormulaRef lhs = nullptr;      // Not/Exists/DExists/Dia child, And left
  FormulaRef rhs = nullptr;      // And right
  std::string var;               // Exists/DExists bound variable
  int modality = 0;              // Dia index, 1-based

  std::size_t hash = 0;
};

namespace detail {
inline std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}
inline std::size_t shash(const std::string& s) {
  return std::hash<std::string>{}(s);
}
} // namespace detail

// Arena owning all nodes; one per loaded problem is typical. Values are
// immutable after construction and safe to share across threads.
class Arena {
public:
  TermRef var(const std::string& name) { return intern_term(TermKind::Var, name, nullptr); }
  TermRef cst(const std::string& name) { return intern_term(TermKind::Const, name, nullptr); }
  TermRef iota(const std::string& bound, FormulaRef body) {
    return intern_term(TermKind::Iota, bound, body);
  }

  FormulaRef atom(const std::string& pred, std::vector<TermRef> args) {
    Formula f;
    f.kind = FormulaKind::Atom;
    f.pred = pred;
    f.terms = std::move(args);
    return intern(std::move(f));
  }
  FormulaRef eq(TermRef a, TermRef b) {
    Formula f;
    f.kind = FormulaKind::Eq;
    f.terms = {a, b};
    return intern(std::move(f));
  }
  FormulaRef neg(FormulaRef a) {
    if (a->kind == FormulaKind::Not) return a->lhs; // collapse double negation
    Formula f;
    f.kind = FormulaKind::Not;
    f.lhs = a;
    return intern(std::move(f));
  }
  FormulaRef conj(FormulaRef a, FormulaRef b) {
    Formula f;
    f.kind = FormulaKind::And;
    f.lhs = a;
    f.rhs = b;
    return intern(std::move(f));
  }
  FormulaRef exists(const std::string& v, FormulaRef a) {
    Formula f;
    f.kind = FormulaKind::Exists;
    f.var = v;
    f.lhs = a;
    return intern(std::move(f));
  }
  FormulaRef dexists(const std::string& v, FormulaRef a) {
    Formula f;
    f.kind = FormulaKind::DExists;
    f.var = v;
    f.lhs = a;
    return intern(std::move(f));
  }
  FormulaRef dia(int a, FormulaRef g) {
    Formula f;
    f.kind = FormulaKind::Dia;
    f.modality = a;
    f.lhs = g;
    return intern(std::move(f));
  }

  // Derived connectives, desugared on the spot.
  FormulaRef disj(FormulaRef a, FormulaRef b) { return neg(conj(neg(a), neg(b))); }
  FormulaRef implies(FormulaRef a, FormulaRef b) { return disj(neg(a), b); }
  FormulaRef iff(FormulaRef a, FormulaRef b) { return conj(implies(a, b), implies(b, a)); }
  FormulaRef forall(const std::string& v, FormulaRef a) { return neg(exists(v, neg(a))); }
  FormulaRef box(int m, FormulaRef a) { return neg(dia(m, neg(a))); }

  FormulaRef conj_all(const std::vector<FormulaRef>& fs) {
    if (fs.empty()) throw std::invalid_argument("conj_all: empty");
    FormulaRef r = fs[0];
    for (std::size_t i = 1; i < fs.size(); ++i) r = conj(r, fs[i]);
    return r;
  }

private:
  struct TKey {
    TermKind k;
    std::string n;
    FormulaRef b;
    bool operator==(const TKey& o) const { return k == o.k && n == o.n && b == o.b; }
  };
  struct TKeyHash {
    std::size_t operator()(const TKey& t) const {
      std::size_t h = detail::mix((std::size_t)t.k, detail::shash(t.n));
      return detail::mix(h, std::hash<const void*>{}(t.b));
    }
  };
  struct FKey {
    const Formula* f;
    bool operator==(const FKey& o) const {
      const Formula &a = *f, &b = *o.f;
      return a.kind == b.kind && a.pred == b.pred && a.terms == b.terms &&
             a.lhs == b.lhs && a.rhs == b.rhs && a.var == b.var &&
             a.modality == b.modality;
    }
  };
  struct FKeyHash {
    std::size_t operator()(const FKey& k) const { return k.f->hash; }
  };

  TermRef intern_term(TermKind k, const std::string& n, FormulaRef b) {
    TKey key{k, n, b};
    auto it = terms_.find(key);
    if (it != terms_.end()) return it->second;
    auto t = std::make_unique<Term>();
    t->kind = k;
    t->name = n;
    t->body = b;
    t->hash = TKeyHash{}(key);
    TermRef r = t.get();
    term_store_.push_back(std::move(t));
    terms_.emplace(key, r);
    return r;
  }

  FormulaRef intern(Formula&& f) {
    std::size_t h = detail::mix((std::size_t)f.kind, detail::shash(f.pred));
    for (auto* t : f.terms) h = detail::mix(h, std::hash<const void*>{}(t));
    h = detail::mix(h, std::hash<const void*>{}(f.lhs));
    h = detail::mix(h, std::hash<const void*>{}(f.rhs));
    h = detail::mix(h, detail::shash(f.var));
    h = detail::mix(h, (std::size_t)f.modality);
    f.hash = h;
    FKey key{&f};
    auto it = formulas_.find(key);
    if (it != formulas_.end()) return it->second;
    auto p = std::make_unique<Formula>(std::move(f));
    FormulaRef r = p.get();
    formula_store_.push_back(std::move(p));
    formulas_.emplace(FKey{r}, r);
    return r;
  }

  std::unordered_map<TKey, TermRef, TKeyHash> terms_;
  std::unordered_map<FKey, FormulaRef, FKeyHash> formulas_;
  std::vector<std::unique_ptr<Term>> term_store_;
  std::vector<std::unique_ptr<Formula>> formula_store_;
};

// ---------------------------------------------------------------------------
// Structural metrics and signature helpers.

inline void free_vars_of(TermRef t, std::set<std::string>& out);

inline void free_vars_of(FormulaRef f, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq:
      for (auto* t : f->terms) free_vars_of(t, out);
      break;
    case FormulaKind::Not:
    case FormulaKind::Dia:
      free_vars_of(f->lhs, out);
      break;
    case FormulaKind::And:
      free_vars_of(f->lhs, out);
      free_vars_of(f->rhs, out);
      break;
    case FormulaKind::Exists: {
      std::set<std::string> inner;
      free_vars_of(f->lhs, inner);
      inner.erase(f->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case FormulaKind::DExists: {
      // x stays free in the difference quantifier: its truth depends on the
      // current value of x.
      std::set<std::string> inner;
      free_vars_of(f->lhs, inner);
      inner.insert(f->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
  }
}

inline void free_vars_of(TermRef t, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Var:
      out.insert(t->name);
      break;
    case TermKind::Const:
      break;
    case TermKind::Iota: {
      std::set<std::string> inner;
      free_vars_of(t->body, inner);
      inner.erase(t->name);
      out.insert(inner.begin(), inner.end());
      break;
    }
  }
}

template <typename Node>
std::set<std::string> free_vars(Node n) {
  std::set<std::string> out;
  free_vars_of(n, out);
  return out;
}

inline int modal_depth(TermRef t);

inline int modal_depth(FormulaRef f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      int d = 0;
      for (auto* t : f->terms) d = std::max(d, modal_depth(t));
      return d;
    }
    case FormulaKind::Eq:
      return std::max(modal_depth(f->terms[0]), modal_depth(f->terms[1]));
    case FormulaKind::Not:
      return modal_depth(f->lhs);
    case FormulaKind::And:
      return std::max(modal_depth(f->lhs), modal_depth(f->rhs));
    case FormulaKind::Exists:
    case FormulaKind::DExists:
      return modal_depth(f->lhs);
    case FormulaKind::Dia:
      return modal_depth(f->lhs) + 1;
  }
  return 0;
}

inline int modal_depth(TermRef t) {
  return t->kind == TermKind::Iota ? modal_depth(t->body) : 0;
}

inline std::uint64_t size_of(TermRef t);

inline std::uint64_t size_of(FormulaRef f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::uint64_t s = 1;
      for (auto* t : f->terms) s += size_of(t);
      return s;
    }
    case FormulaKind::Eq:
      return 1 + size_of(f->terms[0]) + size_of(f->terms[1]);
    case FormulaKind::Not:
    case FormulaKind::Exists:
    case FormulaKind::DExists:
    case FormulaKind::Dia:
      return 1 + size_of(f->lhs);
    case FormulaKind::And:
      return 1 + size_of(f->lhs) + size_of(f->rhs);
  }
  return 0;
}

inline std::uint64_t size_of(TermRef t) {
  return t->kind == TermKind::Iota ? 1 + size_of(t->body) : 1;
}

struct Signature {
  std::map<std::string, int> predicates; // name -> arity
  std::set<std::string> constants;
  std::set<std::string> variables; // all variable names, bound or free
  std::set<int> modalities;
  bool has_dd = false;
  bool has_dexists = false;
};

inline void collect_signature(TermRef t, Signature& sig);

inline void collect_signature(FormulaRef f, Signature& sig) {
  switch (f->kind) {
    case FormulaKind::Atom:
      sig.predicates[f->pred] = (int)f->terms.size();
      for (auto* t : f->terms) collect_signature(t, sig);
      break;
    case FormulaKind::Eq:
      collect_signature(f->terms[0], sig);
      collect_signature(f->terms[1], sig);
      break;
    case FormulaKind::Not:
      collect_signature(f->lhs, sig);
      break;
    case FormulaKind::And:
      collect_signature(f->lhs, sig);
      collect_signature(f->rhs, sig);
      break;
    case FormulaKind::Exists:
      sig.variables.insert(f->var);
      collect_signature(f->lhs, sig);
      break;
    case FormulaKind::DExists:
      sig.has_dexists = true;
      sig.variables.insert(f->var);
      collect_signature(f->lhs, sig);
      break;
    case FormulaKind::Dia:
      sig.modalities.insert(f->modality);
      collect_signature(f->lhs, sig);
      break;
  }
}

inline void collect_signature(TermRef t, Signature& sig) {
  switch (t->kind) {
    case TermKind::Var:
      sig.variables.insert(t->name);
      break;
    case TermKind::Const:
      sig.constants.insert(t->name);
      break;
    case TermKind::Iota:
      sig.has_dd = true;
      sig.variables.insert(t->name);
      collect_signature(t->body, sig);
      break;
  }
}

inline Signature signature_of(FormulaRef f) {
  Signature s;
  collect_signature(f, s);
  return s;
}

// ---------------------------------------------------------------------------
// Fragment classification.

enum class FragmentClass { OneVariable, Monodic, NonMonodic };

struct FragmentTag {
  FragmentClass cls = FragmentClass::NonMonodic;
  bool has_counting = false; // counting quantifiers are not in this language
  bool has_dd = false;
  bool has_constants = false;
};

inline bool subformulas_monodic(FormulaRef f) {
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Eq: {
      for (auto* t : f->terms)
        if (t->kind == TermKind::Iota && !subformulas_monodic(t->body)) return false;
      return true;
    }
    case FormulaKind::Not:
    case FormulaKind::Exists:
    case FormulaKind::DExists:
      return subformulas_monodic(f->lhs);
    case FormulaKind::And:
      return subformulas_monodic(f->lhs) && subformulas_monodic(f->rhs);
    case FormulaKind::Dia:
      return free_vars(f).size() <= 1 && subformulas_monodic(f->lhs);
  }
  return true;
}

inline FragmentTag classify_fragment(FormulaRef f) {
  FragmentTag tag;
  Signature sig = signature_of(f);
  tag.has_dd = sig.has_dd;
  tag.has_constants = !sig.constants.empty();
  int max_arity = 0;
  for (auto& [name, ar] : sig.predicates) max_arity = std::max(max_arity, ar);
  bool one_var = sig.variables.size() <= 1 && max_arity <= 1 && !sig.has_dexists;
  if (one_var)
    tag.cls = FragmentClass::OneVariable;
  else if (subformulas_monodic(f))
    tag.cls = FragmentClass::Monodic;
  else
    tag.cls = FragmentClass::NonMonodic;
  return tag;
}

// Capture-free substitution of a term for a free variable. The formulas we
// substitute into have at most one variable, so capture cannot occur; we
// still stop at binders of the same name.
inline TermRef substitute(Arena& A, TermRef t, const std::string& v, TermRef repl);

inline FormulaRef substitute(Arena& A, FormulaRef f, const std::string& v, TermRef repl) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<TermRef> ts;
      ts.reserve(f->terms.size());
      for (auto* t : f->terms) ts.push_back(substitute(A, t, v, repl));
      return A.atom(f->pred, std::move(ts));
    }
    case FormulaKind::Eq:
      return A.eq(substitute(A, f->terms[0], v, repl), substitute(A, f->terms[1], v, repl));
    case FormulaKind::Not:
      return A.neg(substitute(A, f->lhs, v, repl));
    case FormulaKind::And:
      return A.conj(substitute(A, f->lhs, v, repl), substitute(A, f->rhs, v, repl));
    case FormulaKind::Exists:
      if (f->var == v) return f;
      return A.exists(f->var, substitute(A, f->lhs, v, repl));
    case FormulaKind::DExists:
      if (f->var == v) return f;
      return A.dexists(f->var, substitute(A, f->lhs, v, repl));
    case FormulaKind::Dia:
      return A.dia(f->modality, substitute(A, f->lhs, v, repl));
  }
  return f;
}

inline TermRef substitute(Arena& A, TermRef t, const std::string& v, TermRef repl) {
  switch (t->kind) {
    case TermKind::Var:
      return t->name == v ? repl : t;
    case TermKind::Const:
      return t;
    case TermKind::Iota:
      if (t->name == v) return t;
      return A.iota(t->name, substitute(A, t->body, v, repl));
  }
  return t;
}

} // namespace qml
