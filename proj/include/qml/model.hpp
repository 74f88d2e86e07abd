#pragma once

// Direct Kripke semantics over finite interpretations: per-world domains,
// predicate extensions, partial constant maps, definite descriptions and the
// difference quantifier. Atoms and equalities are false unless all terms
// designate.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qml/ast.hpp"

namespace qml {

struct Interpretation {
  int n_modalities = 1;
  struct World {
    std::vector<std::vector<int>> succ; // [modality-1] -> successor world ids
    std::vector<int> domain;            // element ids, ascending
    std::map<std::string, std::set<std::vector<int>>> preds;
    std::map<std::string, int> consts;  // designating constants only
  };
  std::vector<World> worlds;
  int root = 0;

  World& world(int w) { return worlds[w]; }
  const World& world(int w) const { return worlds[w]; }
  bool in_domain(int w, int e) const {
    const auto& d = worlds[w].domain;
    return std::binary_search(d.begin(), d.end(), e);
  }
};

using Assignment = std::map<std::string, int>;

inline bool satisfies(const Interpretation& M, int w, const Assignment& env,
                      FormulaRef f);

inline std::optional<int> eval_term(const Interpretation& M, int w,
                                    const Assignment& env, TermRef t) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = env.find(t->name);
      if (it == env.end())
        throw std::logic_error("unassigned variable '" + t->name + "'");
      return it->second;
    }
    case TermKind::Const: {
      auto it = M.world(w).consts.find(t->name);
      if (it == M.world(w).consts.end()) return std::nullopt;
      return it->second;
    }
    case TermKind::Iota: {
      std::optional<int> unique;
      for (int d : M.world(w).domain) {
        Assignment inner = env;
        inner[t->name] = d;
        if (satisfies(M, w, inner, t->body)) {
          if (unique) return std::nullopt; // more than one witness
          unique = d;
        }
      }
      return unique;
    }
  }
  return std::nullopt;
}

inline bool satisfies(const Interpretation& M, int w, const Assignment& env,
                      FormulaRef f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<int> tuple;
      tuple.reserve(f->terms.size());
      for (auto* t : f->terms) {
        auto v = eval_term(M, w, env, t);
        if (!v) return false;
        tuple.push_back(*v);
      }
      auto it = M.world(w).preds.find(f->pred);
      if (it == M.world(w).preds.end()) return false;
      return it->second.count(tuple) > 0;
    }
    case FormulaKind::Eq: {
      auto a = eval_term(M, w, env, f->terms[0]);
      auto b = eval_term(M, w, env, f->terms[1]);
      return a && b && *a == *b;
    }
    case FormulaKind::Not:
      return !satisfies(M, w, env, f->lhs);
    case FormulaKind::And:
      return satisfies(M, w, env, f->lhs) && satisfies(M, w, env, f->rhs);
    case FormulaKind::Exists: {
      for (int d : M.world(w).domain) {
        Assignment inner = env;
        inner[f->var] = d;
        if (satisfies(M, w, inner, f->lhs)) return true;
      }
      return false;
    }
    case FormulaKind::DExists: {
      auto cur = env.find(f->var);
      if (cur == env.end())
        throw std::logic_error("difference quantifier over unassigned '" +
                               f->var + "'");
      for (int d : M.world(w).domain) {
        if (d == cur->second) continue;
        Assignment inner = env;
        inner[f->var] = d;
        if (satisfies(M, w, inner, f->lhs)) return true;
      }
      return false;
    }
    case FormulaKind::Dia: {
      for (int v : M.world(w).succ[f->modality - 1])
        if (satisfies(M, v, env, f->lhs)) return true;
      return false;
    }
  }
  return false;
}

inline bool satisfies(const Interpretation& M, int w, FormulaRef f) {
  return satisfies(M, w, Assignment{}, f);
}

// ---------------------------------------------------------------------------
// Tree unfolding. Worlds of the result are paths from the chosen root of
// length at most d; each copies the data of its last world. Satisfaction of
// psi at a copy agrees with the original whenever depth + d(psi) <= d.

inline Interpretation unfold_tree(const Interpretation& M, int w0, int d) {
  Interpretation out;
  out.n_modalities = M.n_modalities;
  struct Node {
    int orig;
    int depth;
  };
  std::vector<Node> nodes{{w0, 0}};
  auto copy_world = [&](int orig) {
    Interpretation::World w;
    w.domain = M.world(orig).domain;
    w.preds = M.world(orig).preds;
    w.consts = M.world(orig).consts;
    w.succ.assign(M.n_modalities, {});
    return w;
  };
  out.worlds.push_back(copy_world(w0));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].depth >= d) continue;
    for (int a = 1; a <= M.n_modalities; ++a) {
      for (int v : M.world(nodes[i].orig).succ[a - 1]) {
        nodes.push_back({v, nodes[i].depth + 1});
        out.worlds.push_back(copy_world(v));
        out.worlds[i].succ[a - 1].push_back((int)nodes.size() - 1);
      }
    }
  }
  out.root = 0;
  return out;
}

// S5 variant: words with adjacent worlds distinct, adjacent modalities
// distinct, and accessibility closed into equivalence classes.
inline Interpretation unfold_tree_s5(const Interpretation& M, int w0, int d) {
  Interpretation out;
  out.n_modalities = M.n_modalities;
  struct Node {
    int orig;
    int depth;
    int in_mod; // modality of the edge from the parent; 0 at the root
  };
  std::vector<Node> nodes{{w0, 0, 0}};
  auto copy_world = [&](int orig) {
    Interpretation::World w;
    w.domain = M.world(orig).domain;
    w.preds = M.world(orig).preds;
    w.consts = M.world(orig).consts;
    w.succ.assign(M.n_modalities, {});
    return w;
  };
  out.worlds.push_back(copy_world(w0));
  std::vector<std::vector<int>> children_by_mod; // tree edges, per node
  children_by_mod.assign(1, {});
  std::vector<std::pair<int, int>> tree_edges; // (parent, child) with modality
  std::vector<int> edge_mod;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].depth >= d) continue;
    for (int a = 1; a <= M.n_modalities; ++a) {
      if (a == nodes[i].in_mod) continue;
      for (int v : M.world(nodes[i].orig).succ[a - 1]) {
        if (v == nodes[i].orig) continue;
        nodes.push_back({v, nodes[i].depth + 1, a});
        out.worlds.push_back(copy_world(v));
        children_by_mod.push_back({});
        tree_edges.push_back({(int)i, (int)nodes.size() - 1});
        edge_mod.push_back(a);
      }
    }
  }
  // close each modality into the smallest equivalence relation containing
  // the tree edges
  int W = (int)nodes.size();
  for (int a = 1; a <= M.n_modalities; ++a) {
    std::vector<int> cls(W);
    for (int i = 0; i < W; ++i) cls[i] = i;
    std::function<int(int)> find = [&](int x) {
      while (cls[x] != x) x = cls[x] = cls[cls[x]];
      return x;
    };
    for (std::size_t e = 0; e < tree_edges.size(); ++e)
      if (edge_mod[e] == a) cls[find(tree_edges[e].first)] = find(tree_edges[e].second);
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < W; ++i) groups[find(i)].push_back(i);
    for (auto& [r, g] : groups)
      for (int i : g) out.worlds[i].succ[a - 1] = g;
  }
  out.root = 0;
  return out;
}

} // namespace qml
