#pragma once

// Types for a one-variable sentence (Boolean-saturated subsets of the
// closure, stored as bitsets over the canonical member enumeration),
// quasistate candidates with multiplicities in N ∪ {aleph0}, and the
// realizability test. Realizability is decided by building the canonical
// first-order structure whose domain is the supported types and
// model-checking every closure member against membership; multiplicities
// beyond support only matter on constant-containing types, which must be
// hit exactly once.

#include <cassert>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qml/ast.hpp"
#include "qml/closure.hpp"
#include "qml/extnat.hpp"

namespace qml {

using TypeId = int;

struct TypeCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Bits = std::vector<std::uint64_t>;

inline bool bits_get(const Bits& b, int i) {
  return (b[i >> 6] >> (i & 63)) & 1;
}
inline void bits_set(Bits& b, int i) { b[i >> 6] |= 1ull << (i & 63); }

// Multiplicity map over types; zero entries are never stored.
struct Quasistate {
  std::map<TypeId, ExtNat> mult;

  void set(TypeId t, ExtNat m) {
    if (m == ExtNat(0))
      mult.erase(t);
    else
      mult[t] = m;
  }
  ExtNat at(TypeId t) const {
    auto it = mult.find(t);
    return it == mult.end() ? ExtNat(0) : it->second;
  }
  bool contains(TypeId t) const { return mult.count(t) > 0; }
  bool empty() const { return mult.empty(); }
  ExtNat total() const {
    ExtNat s(0);
    for (auto& [t, m] : mult) s += m;
    return s;
  }
  std::vector<TypeId> support() const {
    std::vector<TypeId> s;
    s.reserve(mult.size());
    for (auto& [t, m] : mult) s.push_back(t);
    return s;
  }
  bool operator==(const Quasistate& o) const { return mult == o.mult; }
};

class TypeTable {
public:
  // phi must be a one-variable sentence; n_modalities bounds the diamond
  // indices. max_unit_bits caps enumeration at 2^max_unit_bits types.
  TypeTable(Arena& arena, FormulaRef phi, int n_modalities, int max_unit_bits = 20)
      : A(&arena), phi_(phi), n_mod_(n_modalities) {
    auto tag = classify_fragment(phi);
    if (tag.cls != FragmentClass::OneVariable)
      throw FragmentError("type machinery requires the one-variable fragment: " + render(phi));
    phi_size_ = size_of(phi);
    phi_depth_ = modal_depth(phi);
    members_ = sub_x_closure(*A, phi);
    for (int i = 0; i < (int)members_.size(); ++i) index_[members_[i]] = i;
    words_ = (int)((members_.size() + 63) / 64);
    classify_members();
    enumerate_types(max_unit_bits);
    build_masks();
  }

  Arena& arena() const { return *A; }
  FormulaRef phi() const { return phi_; }
  std::uint64_t phi_size() const { return phi_size_; }
  int phi_depth() const { return phi_depth_; }
  int n_modalities() const { return n_mod_; }
  int member_count() const { return (int)members_.size(); }
  FormulaRef member(int i) const { return members_[i]; }
  int member_index(FormulaRef f) const {
    auto it = index_.find(f);
    return it == index_.end() ? -1 : it->second;
  }
  int phi_member() const { return index_.at(phi_); }

  int type_count() const { return (int)types_.size(); }
  const Bits& type_bits(TypeId t) const { return types_[t]; }
  bool type_has(TypeId t, int member) const { return bits_get(types_[t], member); }
  bool type_has_constant(TypeId t) const { return has_constant_[t]; }
  // Largest modal depth among positive diamonds of t; 0 when diamond-free.
  int max_dia_depth(TypeId t) const { return max_dia_depth_[t]; }
  std::uint64_t sentence_key(TypeId t) const { return sentence_key_[t]; }

  struct DiaPair {
    int dia_member;
    int body_member;
    int depth;
  };
  const std::vector<DiaPair>& dia_pairs(int modality) const {
    return dias_[modality - 1];
  }
  // Positive diamonds of the given modality present in t, as a mask over
  // dia_pairs(modality).
  std::uint64_t dia_has(TypeId t, int modality) const {
    return has_mask_[t][modality - 1];
  }
  std::uint64_t dia_needs(TypeId t, int modality) const {
    return needs_mask_[t][modality - 1];
  }

  // t ->_a t': every body present in t' has its diamond in t.
  bool arrow(TypeId t, TypeId t2, int modality) const {
    return (needs_mask_[t2][modality - 1] & ~has_mask_[t][modality - 1]) == 0;
  }
  // S5 coherence: same diamonds both sides, and each side's own members are
  // reflected in them.
  bool equiv(TypeId t, TypeId t2, int modality) const {
    int a = modality - 1;
    return has_mask_[t][a] == has_mask_[t2][a] &&
           (needs_mask_[t][a] & ~has_mask_[t][a]) == 0 &&
           (needs_mask_[t2][a] & ~has_mask_[t][a]) == 0;
  }
  bool self_coherent(TypeId t) const { return self_coherent_[t]; }

  const std::map<std::string, std::vector<int>>& constant_eq_members() const {
    return const_members_;
  }

  // ------------------------------------------------------------------
  // Realizability.

  bool is_realisable(const Quasistate& n) const {
    if (n.empty()) return false;
    for (auto& [t, m] : n.mult)
      if (has_constant_[t] && m != ExtNat(1)) return false;
    return support_realisable(n.support());
  }

  bool support_realisable(const std::vector<TypeId>& supp) const {
    if (supp.empty()) return false;
    std::string key;
    key.reserve(supp.size() * 3);
    for (TypeId t : supp) {
      key += (char)(t & 0xff);
      key += (char)((t >> 8) & 0xff);
      key += (char)((t >> 16) & 0xff);
    }
    auto it = realisable_cache_.find(key);
    if (it != realisable_cache_.end()) return it->second;
    bool r = check_support(supp);
    realisable_cache_.emplace(std::move(key), r);
    return r;
  }

  // The unique supported type containing x = c; nullopt when absent or
  // duplicated (in which case the support is not realisable anyway).
  std::optional<TypeId> constant_type(const std::vector<TypeId>& supp,
                                      const std::string& c) const {
    auto it = const_members_.find(c);
    if (it == const_members_.end()) return std::nullopt;
    std::optional<TypeId> found;
    for (TypeId t : supp)
      for (int m : it->second)
        if (type_has(t, m)) {
          if (found && *found != t) return std::nullopt;
          found = t;
        }
    return found;
  }

private:
  void classify_members() {
    minfo_.resize(members_.size());
    TermRef xvar = A->var(kTypeVariable);
    for (int i = 0; i < (int)members_.size(); ++i) {
      FormulaRef f = members_[i];
      MInfo& mi = minfo_[i];
      mi.sentence = free_vars(f).empty();
      if (f->kind == FormulaKind::Not) {
        mi.kind = MInfo::NegOf;
        mi.a = index_.at(f->lhs);
      } else if (f->kind == FormulaKind::And) {
        mi.kind = MInfo::AndOf;
        mi.a = index_.at(f->lhs);
        mi.b = index_.at(f->rhs);
      } else {
        mi.kind = MInfo::Unit;
        mi.unit_pos = (int)units_.size();
        units_.push_back(i);
      }
      if (f->kind == FormulaKind::Eq) {
        TermRef l = f->terms[0], r = f->terms[1];
        auto record = [&](TermRef v, TermRef c) {
          if (v->kind == TermKind::Var && v->name == kTypeVariable &&
              c->kind == TermKind::Const)
            const_members_[c->name].push_back(i);
        };
        record(l, r);
        record(r, l);
      }
    }
    if ((int)units_.size() > 62)
      throw TypeCapError("closure has too many independent members (" +
                         std::to_string(units_.size()) + ")");
    dias_.assign(n_mod_, {});
    for (int i : units_) {
      FormulaRef f = members_[i];
      if (f->kind == FormulaKind::Dia) {
        if (f->modality > n_mod_)
          throw FragmentError("modality " + std::to_string(f->modality) +
                              " exceeds declared count");
        dias_[f->modality - 1].push_back({i, index_.at(f->lhs), modal_depth(f)});
        if (dias_[f->modality - 1].size() > 64)
          throw TypeCapError("too many diamond subformulas for one modality");
      }
    }
  }

  void enumerate_types(int max_unit_bits) {
    int k = (int)units_.size();
    if (k > max_unit_bits)
      throw TypeCapError("type enumeration over " + std::to_string(k) +
                         " units exceeds the cap of 2^" +
                         std::to_string(max_unit_bits) +
                         " types (QMLSOLVER_CAP_TYPES overrides)");
    std::vector<char> val(members_.size());
    // members are listed parents-first; evaluate child-first via reverse scan
    for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
      for (int u = 0; u < k; ++u) val[units_[u]] = (mask >> u) & 1;
      for (int i = (int)members_.size() - 1; i >= 0; --i) {
        const MInfo& mi = minfo_[i];
        if (mi.kind == MInfo::NegOf)
          val[i] = !val[mi.a];
        else if (mi.kind == MInfo::AndOf)
          val[i] = val[mi.a] && val[mi.b];
      }
      Bits b(words_, 0);
      for (int i = 0; i < (int)members_.size(); ++i)
        if (val[i]) bits_set(b, i);
      types_.push_back(std::move(b));
    }
  }

  void build_masks() {
    int T = (int)types_.size();
    has_mask_.assign(T, std::vector<std::uint64_t>(n_mod_, 0));
    needs_mask_.assign(T, std::vector<std::uint64_t>(n_mod_, 0));
    max_dia_depth_.assign(T, 0);
    has_constant_.assign(T, false);
    sentence_key_.assign(T, 0);
    self_coherent_.assign(T, true);
    int sent_units = 0;
    std::vector<int> sent_pos(units_.size(), -1);
    for (int u = 0; u < (int)units_.size(); ++u)
      if (minfo_[units_[u]].sentence) sent_pos[u] = sent_units++;
    if (sent_units > 64) throw TypeCapError("too many sentence units");
    for (TypeId t = 0; t < T; ++t) {
      for (int a = 0; a < n_mod_; ++a) {
        for (int p = 0; p < (int)dias_[a].size(); ++p) {
          if (type_has(t, dias_[a][p].dia_member)) {
            has_mask_[t][a] |= 1ull << p;
            max_dia_depth_[t] = std::max(max_dia_depth_[t], dias_[a][p].depth);
          }
          if (type_has(t, dias_[a][p].body_member)) needs_mask_[t][a] |= 1ull << p;
        }
        if (needs_mask_[t][a] & ~has_mask_[t][a]) self_coherent_[t] = false;
      }
      for (auto& [c, ms] : const_members_)
        for (int m : ms)
          if (type_has(t, m)) has_constant_[t] = true;
      for (int u = 0; u < (int)units_.size(); ++u)
        if (sent_pos[u] >= 0 && type_has(t, units_[u]))
          sentence_key_[t] |= 1ull << sent_pos[u];
    }
  }

  // ------------------------------------------------------------------
  // Canonical-structure check: domain = supported types; unary predicates
  // read off the P(x) member, constants denote their unique x = c type.
  // The support is realisable iff every member's truth at every element
  // matches membership.

  struct Env {
    const std::string* var = nullptr;
    int elt = -1; // index into supp
  };

  bool check_support(const std::vector<TypeId>& supp) const {
    for (auto& [c, ms] : const_members_) {
      int found = 0;
      for (TypeId t : supp) {
        bool has = false;
        for (int m : ms) has = has || type_has(t, m);
        found += has ? 1 : 0;
      }
      if (found != 1) return false;
    }
    for (int e = 0; e < (int)supp.size(); ++e) {
      for (int m = 0; m < (int)members_.size(); ++m) {
        Env env{&kTypeVariable, e};
        if (eval(supp, members_[m], env) != type_has(supp[e], m)) return false;
      }
    }
    return true;
  }

  std::optional<int> const_element(const std::vector<TypeId>& supp,
                                   const std::string& c) const {
    auto it = const_members_.find(c);
    if (it == const_members_.end())
      throw std::logic_error("constant '" + c +
                             "' has no x = c closure member; add an existence "
                             "conjunct before building quasistates");
    for (int e = 0; e < (int)supp.size(); ++e)
      for (int m : it->second)
        if (type_has(supp[e], m)) return e;
    return std::nullopt;
  }

  std::optional<int> eval_term(const std::vector<TypeId>& supp, TermRef t,
                               const Env& env) const {
    switch (t->kind) {
      case TermKind::Var:
        if (env.var && t->name == *env.var) return env.elt;
        throw std::logic_error("unbound variable in realizability check");
      case TermKind::Const:
        return const_element(supp, t->name);
      case TermKind::Iota: {
        std::optional<int> unique;
        for (int e = 0; e < (int)supp.size(); ++e) {
          Env inner{&t->name, e};
          if (eval(supp, t->body, inner)) {
            if (unique) return std::nullopt;
            unique = e;
          }
        }
        return unique;
      }
    }
    return std::nullopt;
  }

  bool eval(const std::vector<TypeId>& supp, FormulaRef f, const Env& env) const {
    switch (f->kind) {
      case FormulaKind::Atom: {
        if (f->terms.empty()) {
          int m = index_.at(f);
          return type_has(supp[0], m); // world-level fact, uniform by check
        }
        if (f->terms.size() != 1)
          throw FragmentError("realizability limited to unary predicates");
        auto e = eval_term(supp, f->terms[0], env);
        if (!e) return false;
        int pm = member_index(A->atom(f->pred, {A->var(kTypeVariable)}));
        if (pm >= 0) return type_has(supp[*e], pm);
        // No P(x) member: the extension is pinned by the closed atoms.
        int m = index_.at(f);
        return type_has(supp[0], m);
      }
      case FormulaKind::Eq: {
        auto a = eval_term(supp, f->terms[0], env);
        auto b = eval_term(supp, f->terms[1], env);
        return a && b && *a == *b;
      }
      case FormulaKind::Not:
        return !eval(supp, f->lhs, env);
      case FormulaKind::And:
        return eval(supp, f->lhs, env) && eval(supp, f->rhs, env);
      case FormulaKind::Exists: {
        for (int e = 0; e < (int)supp.size(); ++e) {
          Env inner{&f->var, e};
          if (eval(supp, f->lhs, inner)) return true;
        }
        return false;
      }
      case FormulaKind::DExists:
        throw FragmentError("difference quantifier has no type semantics; "
                            "translate it away first");
      case FormulaKind::Dia: {
        auto fv = free_vars(f);
        if (fv.empty()) return type_has(supp[0], index_.at(f));
        FormulaRef norm = substitute(*A, f, *fv.begin(), A->var(kTypeVariable));
        int m = index_.at(norm);
        if (env.var && *fv.begin() == *env.var) return type_has(supp[env.elt], m);
        throw std::logic_error("diamond over unbound variable");
      }
    }
    return false;
  }

  Arena* A;
  FormulaRef phi_;
  int n_mod_;
  std::uint64_t phi_size_ = 0;
  int phi_depth_ = 0;
  std::vector<FormulaRef> members_;
  std::unordered_map<FormulaRef, int> index_;
  int words_ = 0;

  struct MInfo {
    enum Kind { Unit, NegOf, AndOf } kind = Unit;
    int a = -1, b = -1;
    int unit_pos = -1;
    bool sentence = false;
  };
  std::vector<MInfo> minfo_;
  std::vector<int> units_;
  std::vector<std::vector<DiaPair>> dias_;
  std::map<std::string, std::vector<int>> const_members_;

  std::vector<Bits> types_;
  std::vector<std::vector<std::uint64_t>> has_mask_, needs_mask_;
  std::vector<int> max_dia_depth_;
  std::vector<bool> has_constant_;
  std::vector<std::uint64_t> sentence_key_;
  std::vector<bool> self_coherent_;

  mutable std::unordered_map<std::string, bool> realisable_cache_;
};

// ---------------------------------------------------------------------------
// Simple compatibility and the squeeze construction.

inline bool simply_compatible(const TypeTable& tt, const Quasistate& n,
                              const Quasistate& n2) {
  for (auto& [t, m] : n.mult) {
    if (tt.type_has_constant(t)) {
      if (m != ExtNat(1) || n2.at(t) != ExtNat(1)) return false;
    }
    if (!n2.contains(t)) return false;
  }
  for (auto& [t, m] : n2.mult) {
    if (tt.type_has_constant(t) && m != ExtNat(1)) return false;
    if (!n.contains(t)) return false;
  }
  return true;
}

// Finite realisable m' with n <= m' <= m and |m'| <= |n| + |phi|. B collects
// the constant types of m and one witness type per existential true in m.
inline Quasistate squeeze(const TypeTable& tt, const Quasistate& m,
                          const Quasistate& n) {
  if (n.empty()) throw std::invalid_argument("squeeze: n must be a nonempty candidate");
  for (auto& [t, v] : n.mult) {
    if (v.is_inf()) throw std::invalid_argument("squeeze: n must be finite");
    if (!(v <= m.at(t))) throw std::invalid_argument("squeeze: n <= m violated");
  }
  if (!tt.is_realisable(m)) throw std::invalid_argument("squeeze: m not realisable");
  auto supp = m.support();
  std::vector<TypeId> B;
  for (auto& [c, ms] : tt.constant_eq_members()) {
    (void)ms;
    auto tc = tt.constant_type(supp, c);
    if (tc) B.push_back(*tc);
  }
  // one witness per existential member true in the (uniform) support
  for (int i = 0; i < tt.member_count(); ++i) {
    FormulaRef f = tt.member(i);
    if (f->kind != FormulaKind::Exists) continue;
    if (!tt.type_has(supp[0], i)) continue;
    FormulaRef body =
        substitute(tt.arena(), f->lhs, f->var, tt.arena().var(kTypeVariable));
    int bm = tt.member_index(body);
    if (bm < 0) continue;
    for (TypeId t : supp)
      if (tt.type_has(t, bm)) {
        B.push_back(t);
        break;
      }
  }
  Quasistate out;
  for (auto& [t, v] : n.mult) out.set(t, v);
  for (TypeId t : B) out.set(t, min(m.at(t), n.at(t) + ExtNat(1)));
  return out;
}

} // namespace qml
