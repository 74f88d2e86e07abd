#pragma once

// Brute-force model search, the independent verification oracle.
//
// K_n: tree frames are enumerated in canonical order (iterative deepening on
// world count, then domain size, then frame shape). For each frame and
// domain-size assignment, every world's local structure ranges over a
// deterministic stream of predicate extensions and partial constant maps.
// The search walks the tree bottom-up: a node's subtree is summarized by the
// set of achievable truth vectors for the diamond bodies its parent can ask
// about, so the enumeration over whole-tree structure combinations is exact
// but never materialized. The first model in stream order is returned.
//
// S5/S5_n: frames are equivalence classes enumerated directly as partitions
// (canonical up to permutations fixing the designated world); structures are
// assigned world by world with three-valued pruning at the designated world.
//
// Cost model: a node with domain size k, p unary predicates and c constants
// has 2^(pk) * (k+1)^c local structures; the subtree summaries bound the
// cross products. The acceptance corpus keeps k <= 4 and trees of depth <= 2
// with branching <= 3, which keeps every call under a few milliseconds.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "qml/ast.hpp"
#include "qml/closure.hpp"
#include "qml/model.hpp"
#include "qml/parse.hpp"

namespace qml {

struct OracleBounds {
  int max_worlds = 8;
  int max_depth = 2;
  int max_branching = 3;
  int max_domain = 3;
};

struct OracleLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace oracle_detail {

struct DiaInfo {
  FormulaRef f;
  int modality;
  std::vector<std::string> fvars; // sorted
};

struct Sig {
  std::vector<std::pair<std::string, int>> preds;
  std::vector<std::string> consts;
};

inline Sig oracle_signature(FormulaRef phi) {
  Signature s = signature_of(phi);
  Sig out;
  for (auto& [p, ar] : s.predicates) out.preds.push_back({p, ar});
  for (auto& c : s.constants) out.consts.push_back(c);
  return out;
}

inline std::vector<DiaInfo> collect_dias(FormulaRef phi) {
  std::vector<DiaInfo> dias;
  for (FormulaRef f : subformulas(phi)) {
    if (f->kind != FormulaKind::Dia) continue;
    DiaInfo d;
    d.f = f;
    d.modality = f->modality;
    for (auto& v : free_vars(f)) d.fvars.push_back(v);
    dias.push_back(d);
  }
  return dias;
}

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > UINT64_MAX / b) return UINT64_MAX;
  return a * b;
}

inline std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r = sat_mul(r, b);
  return r;
}

// Deterministic stream of local first-order structures over domain {0..k-1}.
class StructStream {
public:
  StructStream(const Sig& sig, int k, bool total_consts)
      : sig_(sig), k_(k), total_(total_consts) {
    count_ = 1;
    for (auto& [p, ar] : sig_.preds) {
      std::uint64_t tuples = ipow(k, ar);
      if (tuples > 62) throw OracleLimit("oracle: predicate arity x domain too large");
      count_ = sat_mul(count_, ipow(2, (int)tuples));
    }
    for (std::size_t i = 0; i < sig_.consts.size(); ++i)
      count_ = sat_mul(count_, total_ ? k : k + 1);
  }

  std::uint64_t count() const { return count_; }

  void build(std::uint64_t idx, Interpretation::World& w) const {
    w.preds.clear();
    w.consts.clear();
    for (auto& [p, ar] : sig_.preds) {
      std::uint64_t tuples = ipow(k_, ar);
      std::uint64_t opts = ipow(2, (int)tuples);
      std::uint64_t bits = idx % opts;
      idx /= opts;
      auto& ext = w.preds[p];
      for (std::uint64_t t = 0; t < tuples; ++t) {
        if (!((bits >> t) & 1)) continue;
        std::vector<int> tuple(ar);
        std::uint64_t v = t;
        for (int i = ar - 1; i >= 0; --i) {
          tuple[i] = (int)(v % k_);
          v /= k_;
        }
        ext.insert(tuple);
      }
    }
    for (auto& c : sig_.consts) {
      std::uint64_t opts = total_ ? k_ : k_ + 1;
      std::uint64_t choice = idx % opts;
      idx /= opts;
      if (total_)
        w.consts[c] = (int)choice;
      else if (choice > 0)
        w.consts[c] = (int)(choice - 1);
    }
  }

private:
  const Sig& sig_;
  int k_;
  bool total_;
  std::uint64_t count_;
};

} // namespace oracle_detail

class TreeOracle {
public:
  TreeOracle(FormulaRef phi, int n_mod, DomainKind domains, bool total_consts,
             OracleBounds b, std::uint64_t budget = 200'000'000ull)
      : phi_(phi),
        n_(n_mod),
        domains_(domains),
        total_(total_consts),
        b_(b),
        budget_(budget) {
    sig_ = oracle_detail::oracle_signature(phi);
    dias_ = oracle_detail::collect_dias(phi);
  }

  std::uint64_t steps_used() const { return steps_; }

  std::optional<Interpretation> search() {
    for (int m = 1; m <= b_.max_worlds; ++m) {
      if (domains_ == DomainKind::Constant) {
        for (int k = 1; k <= b_.max_domain; ++k) {
          auto r = frames(m, k, false);
          if (r) return r;
        }
      } else {
        auto r = frames(m, 0, true);
        if (r) return r;
      }
    }
    return std::nullopt;
  }

private:
  // Enumerate canonical (parent, modality) labelings for m worlds, then
  // domain sizes, then attempt the structure search.
  std::optional<Interpretation> frames(int m, int const_k, bool expanding) {
    parent_.assign(m, -1);
    pmod_.assign(m, 0);
    depth_.assign(m, 0);
    return frame_rec(1, m, const_k, expanding);
  }

  std::optional<Interpretation> frame_rec(int i, int m, int const_k, bool expanding) {
    if (i == m) {
      children_.assign(m, {});
      for (int j = 1; j < m; ++j) children_[parent_[j]].push_back(j);
      size_.assign(m, const_k);
      if (!expanding) return attempt();
      return sizes_rec(0, m);
    }
    int pstart = i == 1 ? 0 : parent_[i - 1];
    for (int p = pstart; p < i; ++p) {
      if (depth_[p] + 1 > b_.max_depth) continue;
      int fanout = 0;
      for (int j = 1; j < i; ++j)
        if (parent_[j] == p) ++fanout;
      if (fanout >= b_.max_branching) continue;
      int mstart = (i > 1 && parent_[i - 1] == p) ? pmod_[i - 1] : 1;
      for (int a = mstart; a <= n_; ++a) {
        parent_[i] = p;
        pmod_[i] = a;
        depth_[i] = depth_[p] + 1;
        auto r = frame_rec(i + 1, m, const_k, expanding);
        if (r) return r;
      }
    }
    return std::nullopt;
  }

  std::optional<Interpretation> sizes_rec(int i, int m) {
    if (i == m) return attempt();
    int lo = i == 0 ? 1 : size_[parent_[i]];
    for (int k = lo; k <= b_.max_domain; ++k) {
      size_[i] = k;
      auto r = sizes_rec(i + 1, m);
      if (r) return r;
    }
    return std::nullopt;
  }

  // Entry spaces. A node's own entries are (dia, tuple over its domain);
  // the interface it offers its parent covers the dias of the edge modality
  // with tuples over the parent's domain.
  struct Entries {
    std::vector<std::pair<int, std::vector<int>>> list; // (dia idx, tuple)
    std::map<std::pair<int, std::vector<int>>, int> index;
    void add(int dia, std::vector<int> tuple) {
      index[{dia, tuple}] = (int)list.size();
      list.push_back({dia, std::move(tuple)});
    }
  };

  void tuples_over(int k, int arity, std::vector<std::vector<int>>& out) const {
    out.clear();
    std::vector<int> cur(arity, 0);
    while (true) {
      out.push_back(cur);
      int i = arity - 1;
      while (i >= 0 && cur[i] == k - 1) cur[i--] = 0;
      if (i < 0) break;
      ++cur[i];
    }
  }

  Entries own_entries(int v) const {
    Entries e;
    std::vector<std::vector<int>> tuples;
    for (int d = 0; d < (int)dias_.size(); ++d) {
      tuples_over(size_[v], (int)dias_[d].fvars.size(), tuples);
      for (auto& t : tuples) e.add(d, t);
    }
    if (e.list.size() > 62) throw OracleLimit("oracle: too many modal entries");
    return e;
  }

  Entries interface_entries(int v) const {
    Entries e;
    int p = parent_[v];
    std::vector<std::vector<int>> tuples;
    for (int d = 0; d < (int)dias_.size(); ++d) {
      if (dias_[d].modality != pmod_[v]) continue;
      tuples_over(size_[p], (int)dias_[d].fvars.size(), tuples);
      for (auto& t : tuples) e.add(d, t);
    }
    if (e.list.size() > 62) throw OracleLimit("oracle: too many interface entries");
    return e;
  }

  void tick() {
    if (++steps_ > budget_) throw OracleLimit("oracle budget exceeded");
  }

  // Classical evaluation at one world, with diamonds read off the modal
  // vector mv (bits over own_entries).
  bool eval_local(int v, const Interpretation::World& w, const Entries& own,
                  std::uint64_t mv, FormulaRef f, Assignment& env) const {
    switch (f->kind) {
      case FormulaKind::Atom: {
        std::vector<int> tuple;
        for (auto* t : f->terms) {
          auto val = eval_term_local(v, w, own, mv, t, env);
          if (!val) return false;
          tuple.push_back(*val);
        }
        auto it = w.preds.find(f->pred);
        return it != w.preds.end() && it->second.count(tuple) > 0;
      }
      case FormulaKind::Eq: {
        auto a = eval_term_local(v, w, own, mv, f->terms[0], env);
        auto b = eval_term_local(v, w, own, mv, f->terms[1], env);
        return a && b && *a == *b;
      }
      case FormulaKind::Not:
        return !eval_local(v, w, own, mv, f->lhs, env);
      case FormulaKind::And:
        return eval_local(v, w, own, mv, f->lhs, env) &&
               eval_local(v, w, own, mv, f->rhs, env);
      case FormulaKind::Exists: {
        for (int d = 0; d < size_[v]; ++d) {
          auto saved = env.find(f->var) != env.end()
                           ? std::optional<int>(env[f->var])
                           : std::nullopt;
          env[f->var] = d;
          bool ok = eval_local(v, w, own, mv, f->lhs, env);
          if (saved)
            env[f->var] = *saved;
          else
            env.erase(f->var);
          if (ok) return true;
        }
        return false;
      }
      case FormulaKind::DExists: {
        auto cur = env.find(f->var);
        if (cur == env.end()) throw std::logic_error("dexists unassigned");
        int curval = cur->second;
        for (int d = 0; d < size_[v]; ++d) {
          if (d == curval) continue;
          env[f->var] = d;
          bool ok = eval_local(v, w, own, mv, f->lhs, env);
          env[f->var] = curval;
          if (ok) return true;
        }
        return false;
      }
      case FormulaKind::Dia: {
        int di = -1;
        for (int d = 0; d < (int)dias_.size(); ++d)
          if (dias_[d].f == f) {
            di = d;
            break;
          }
        std::vector<int> tuple;
        for (auto& var : dias_[di].fvars) tuple.push_back(env.at(var));
        int bit = own.index.at({di, tuple});
        return (mv >> bit) & 1;
      }
    }
    return false;
  }

  std::optional<int> eval_term_local(int v, const Interpretation::World& w,
                                     const Entries& own, std::uint64_t mv,
                                     TermRef t, Assignment& env) const {
    switch (t->kind) {
      case TermKind::Var:
        return env.at(t->name);
      case TermKind::Const: {
        auto it = w.consts.find(t->name);
        if (it == w.consts.end()) return std::nullopt;
        return it->second;
      }
      case TermKind::Iota: {
        std::optional<int> unique;
        for (int d = 0; d < size_[v]; ++d) {
          auto saved = env.find(t->name) != env.end()
                           ? std::optional<int>(env[t->name])
                           : std::nullopt;
          env[t->name] = d;
          bool ok = eval_local(v, w, own, mv, t->body, env);
          if (saved)
            env[t->name] = *saved;
          else
            env.erase(t->name);
          if (ok) {
            if (unique) return std::nullopt;
            unique = d;
          }
        }
        return unique;
      }
    }
    return std::nullopt;
  }

  struct NodeRealization {
    // body vectors achievable for the parent, with the first (structure,
    // modal vector) realizing each
    std::vector<std::uint64_t> vecs;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> first;
  };

  // Achievable own modal vectors, as ordered dedup'd list.
  std::vector<std::uint64_t> modal_set(int v, const Entries& own) {
    std::vector<std::uint64_t> cur{0};
    std::unordered_set<std::uint64_t> seen{0};
    for (int u : children_[v]) {
      realize(u);
      const NodeRealization& r = realized_[u];
      Entries iface = interface_entries(u);
      // embed interface bits into own-entry positions
      std::vector<int> embed(iface.list.size());
      for (int j = 0; j < (int)iface.list.size(); ++j)
        embed[j] = own.index.at(iface.list[j]);
      std::vector<std::uint64_t> next;
      std::unordered_set<std::uint64_t> nseen;
      for (std::uint64_t base : cur) {
        for (std::uint64_t p : r.vecs) {
          std::uint64_t add = 0;
          for (int j = 0; j < (int)iface.list.size(); ++j)
            if ((p >> j) & 1) add |= 1ull << embed[j];
          std::uint64_t m = base | add;
          if (nseen.insert(m).second) next.push_back(m);
        }
      }
      cur = std::move(next);
      if (cur.size() > 100000) throw OracleLimit("oracle: modal profile blowup");
    }
    return cur;
  }

  void realize(int v) {
    NodeRealization out;
    Entries own = own_entries(v);
    Entries iface = interface_entries(v);
    std::vector<std::uint64_t> mvs = modal_set(v, own);
    oracle_detail::StructStream stream(sig_, size_[v], total_);
    Interpretation::World w;
    w.domain.resize(size_[v]);
    for (int i = 0; i < size_[v]; ++i) w.domain[i] = i;
    std::unordered_set<std::uint64_t> seen;
    for (std::uint64_t si = 0; si < stream.count(); ++si) {
      stream.build(si, w);
      for (std::uint64_t mv : mvs) {
        tick();
        std::uint64_t vec = 0;
        for (int j = 0; j < (int)iface.list.size(); ++j) {
          auto& [di, tuple] = iface.list[j];
          Assignment env;
          for (std::size_t x = 0; x < dias_[di].fvars.size(); ++x)
            env[dias_[di].fvars[x]] = tuple[x];
          if (eval_local(v, w, own, mv, dias_[di].f->lhs, env)) vec |= 1ull << j;
        }
        if (seen.insert(vec).second) {
          out.vecs.push_back(vec);
          out.first.push_back({si, mv});
        }
      }
    }
    realized_[v] = std::move(out);
  }

  std::optional<Interpretation> attempt() {
    int m = (int)parent_.size();
    realized_.assign(m, {});
    Entries own = own_entries(0);
    std::vector<std::uint64_t> mvs;
    try {
      mvs = modal_set(0, own);
    } catch (const OracleLimit&) {
      throw;
    }
    oracle_detail::StructStream stream(sig_, size_[0], total_);
    Interpretation::World w;
    w.domain.resize(size_[0]);
    for (int i = 0; i < size_[0]; ++i) w.domain[i] = i;
    for (std::uint64_t si = 0; si < stream.count(); ++si) {
      stream.build(si, w);
      for (std::uint64_t mv : mvs) {
        tick();
        Assignment env;
        if (eval_local(0, w, own, mv, phi_, env)) return reconstruct(si, mv);
      }
    }
    return std::nullopt;
  }

  // Rebuild the first witness: realize the chosen modal vector at each node
  // by an exact choice of child contributions.
  std::optional<Interpretation> reconstruct(std::uint64_t root_si,
                                            std::uint64_t root_mv) {
    int m = (int)parent_.size();
    Interpretation M;
    M.n_modalities = n_;
    M.worlds.resize(m);
    for (int v = 0; v < m; ++v) {
      M.worlds[v].succ.assign(n_, {});
      M.worlds[v].domain.resize(size_[v]);
      for (int i = 0; i < size_[v]; ++i) M.worlds[v].domain[i] = i;
    }
    for (int v = 1; v < m; ++v)
      M.worlds[parent_[v]].succ[pmod_[v] - 1].push_back(v);
    bool ok = assemble(M, 0, root_si, root_mv);
    if (!ok) throw std::logic_error("oracle: witness reconstruction failed");
    M.root = 0;
    return M;
  }

  bool assemble(Interpretation& M, int v, std::uint64_t si, std::uint64_t mv) {
    oracle_detail::StructStream stream(sig_, size_[v], total_);
    stream.build(si, M.worlds[v]);
    Entries own = own_entries(v);
    // pick child vectors whose union is exactly mv
    std::vector<int> kids = children_[v];
    std::vector<std::uint64_t> picks(kids.size(), 0);
    std::function<bool(std::size_t, std::uint64_t)> pick =
        [&](std::size_t i, std::uint64_t acc) -> bool {
      if (i == kids.size()) return acc == mv;
      int u = kids[i];
      Entries iface = interface_entries(u);
      std::vector<int> embed(iface.list.size());
      for (int j = 0; j < (int)iface.list.size(); ++j)
        embed[j] = own.index.at(iface.list[j]);
      for (std::uint64_t p : realized_[u].vecs) {
        std::uint64_t add = 0;
        for (int j = 0; j < (int)iface.list.size(); ++j)
          if ((p >> j) & 1) add |= 1ull << embed[j];
        if (add & ~mv) continue;
        picks[i] = p;
        if (pick(i + 1, acc | add)) return true;
      }
      return false;
    };
    if (!pick(0, 0)) return false;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      int u = kids[i];
      const NodeRealization& r = realized_[u];
      std::size_t at = 0;
      while (r.vecs[at] != picks[i]) ++at;
      if (!assemble(M, u, r.first[at].first, r.first[at].second)) return false;
    }
    return true;
  }

  FormulaRef phi_;
  int n_;
  DomainKind domains_;
  bool total_;
  OracleBounds b_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  oracle_detail::Sig sig_;
  std::vector<oracle_detail::DiaInfo> dias_;

  std::vector<int> parent_, pmod_, depth_, size_;
  std::vector<std::vector<int>> children_;
  std::vector<NodeRealization> realized_;
};

inline std::optional<Interpretation> brute_force_sat(
    FormulaRef phi, int n_mod, DomainKind domains, bool total_consts,
    OracleBounds bounds, std::uint64_t budget = 200'000'000ull) {
  TreeOracle o(phi, n_mod, domains, total_consts, bounds, budget);
  return o.search();
}

// ---------------------------------------------------------------------------
// S5_n oracle: equivalence frames as partitions, constant domains, DFS over
// per-world structures with three-valued pruning at the designated world 0.

class S5Oracle {
public:
  S5Oracle(FormulaRef phi, int n_mod, bool total_consts, int max_worlds,
           int max_domain, std::uint64_t budget = 200'000'000ull)
      : phi_(phi), n_(n_mod), total_(total_consts), max_worlds_(max_worlds),
        max_domain_(max_domain), budget_(budget) {
    sig_ = oracle_detail::oracle_signature(phi);
  }

  std::optional<Interpretation> search() {
    for (int m = 1; m <= max_worlds_; ++m) {
      std::vector<std::vector<std::vector<int>>> combos = partition_combos(m);
      for (int k = 1; k <= max_domain_; ++k) {
        for (auto& combo : combos) {
          auto r = attempt(m, k, combo);
          if (r) return r;
        }
      }
    }
    return std::nullopt;
  }

private:
  enum Tri { F = 0, T = 1, U = 2 };

  static std::vector<std::vector<int>> partitions_of(int m) {
    // restricted growth strings
    std::vector<std::vector<int>> out;
    std::vector<int> rgs(m, 0);
    std::function<void(int, int)> rec = [&](int i, int maxc) {
      if (i == m) {
        out.push_back(rgs);
        return;
      }
      for (int c = 0; c <= maxc + 1; ++c) {
        rgs[i] = c;
        rec(i + 1, std::max(maxc, c));
      }
    };
    if (m > 0) {
      rgs[0] = 0;
      rec(1, 0);
    }
    return out;
  }

  std::vector<std::vector<std::vector<int>>> partition_combos(int m) {
    auto parts = partitions_of(m);
    std::vector<std::vector<std::vector<int>>> combos;
    std::vector<std::vector<int>> cur(n_);
    std::function<void(int)> rec = [&](int a) {
      if (a == n_) {
        if (!connected(m, cur)) return;
        if (!canonical(m, cur)) return;
        combos.push_back(cur);
        return;
      }
      for (auto& p : parts) {
        cur[a] = p;
        rec(a + 1);
      }
    };
    rec(0);
    return combos;
  }

  bool connected(int m, const std::vector<std::vector<int>>& combo) const {
    std::vector<int> seen(m, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int w = stack.back();
      stack.pop_back();
      for (int a = 0; a < n_; ++a)
        for (int v = 0; v < m; ++v)
          if (!seen[v] && combo[a][v] == combo[a][w]) {
            seen[v] = 1;
            stack.push_back(v);
          }
    }
    for (int v = 0; v < m; ++v)
      if (!seen[v]) return false;
    return true;
  }

  // minimal representative under permutations fixing world 0
  bool canonical(int m, const std::vector<std::vector<int>>& combo) const {
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    auto key = [&](const std::vector<int>& p) {
      std::string s;
      for (int a = 0; a < n_; ++a) {
        std::vector<int> relabel(m, -1);
        int next = 0;
        for (int i = 0; i < m; ++i) {
          int c = combo[a][p[i]];
          if (relabel[c] < 0) relabel[c] = next++;
          s += (char)('a' + relabel[c]);
        }
        s += '|';
      }
      return s;
    };
    std::string mine = key(perm);
    std::sort(perm.begin() + 1, perm.end());
    do {
      if (key(perm) < mine) return false;
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
    return true;
  }

  std::optional<Interpretation> attempt(int m, int k,
                                        const std::vector<std::vector<int>>& combo) {
    M_.n_modalities = n_;
    M_.worlds.assign(m, {});
    M_.root = 0;
    for (int w = 0; w < m; ++w) {
      M_.worlds[w].succ.assign(n_, {});
      for (int a = 0; a < n_; ++a)
        for (int v = 0; v < m; ++v)
          if (combo[a][v] == combo[a][w]) M_.worlds[w].succ[a].push_back(v);
      M_.worlds[w].domain.resize(k);
      for (int i = 0; i < k; ++i) M_.worlds[w].domain[i] = i;
    }
    assigned_.assign(m, false);
    oracle_detail::StructStream stream(sig_, k, total_);
    if (dfs(0, m, stream)) return M_;
    return std::nullopt;
  }

  bool dfs(int w, int m, const oracle_detail::StructStream& stream) {
    if (w == m) {
      Assignment env;
      return eval3(0, phi_, env) == T;
    }
    for (std::uint64_t si = 0; si < stream.count(); ++si) {
      if (++steps_ > budget_) throw OracleLimit("oracle budget exceeded");
      stream.build(si, M_.worlds[w]);
      assigned_[w] = true;
      Assignment env;
      Tri r = eval3(0, phi_, env);
      if (r == T) {
        // fill the remaining worlds with the first structure
        for (int v = w + 1; v < m; ++v) stream.build(0, M_.worlds[v]);
        return true;
      }
      if (r == U && dfs(w + 1, m, stream)) return true;
      assigned_[w] = false;
    }
    return false;
  }

  static Tri tri_not(Tri a) { return a == U ? U : (a == T ? F : T); }
  static Tri tri_and(Tri a, Tri b) {
    if (a == F || b == F) return F;
    if (a == T && b == T) return T;
    return U;
  }
  static Tri tri_or(Tri a, Tri b) {
    if (a == T || b == T) return T;
    if (a == F && b == F) return F;
    return U;
  }

  struct TriElt {
    Tri defined;
    int elt = -1;
  };

  TriElt eval_term3(int w, TermRef t, Assignment& env) {
    switch (t->kind) {
      case TermKind::Var:
        return {T, env.at(t->name)};
      case TermKind::Const: {
        if (!assigned_[w]) return {U, -1};
        auto it = M_.worlds[w].consts.find(t->name);
        if (it == M_.worlds[w].consts.end()) return {F, -1};
        return {T, it->second};
      }
      case TermKind::Iota: {
        int truec = 0, unkc = 0, elt = -1;
        for (int d : M_.worlds[w].domain) {
          auto saved = env.find(t->name) != env.end()
                           ? std::optional<int>(env[t->name])
                           : std::nullopt;
          env[t->name] = d;
          Tri r = eval3(w, t->body, env);
          if (saved)
            env[t->name] = *saved;
          else
            env.erase(t->name);
          if (r == T) {
            ++truec;
            elt = d;
          } else if (r == U) {
            ++unkc;
          }
        }
        if (truec >= 2) return {F, -1};
        if (unkc > 0) return {U, -1};
        if (truec == 1) return {T, elt};
        return {F, -1};
      }
    }
    return {F, -1};
  }

  Tri eval3(int w, FormulaRef f, Assignment& env) {
    switch (f->kind) {
      case FormulaKind::Atom: {
        std::vector<int> tuple;
        bool unknown = false;
        for (auto* t : f->terms) {
          TriElt v = eval_term3(w, t, env);
          if (v.defined == F) return F;
          if (v.defined == U) unknown = true;
          tuple.push_back(v.elt);
        }
        if (!assigned_[w] || unknown) return U;
        auto it = M_.worlds[w].preds.find(f->pred);
        bool in = it != M_.worlds[w].preds.end() && it->second.count(tuple) > 0;
        return in ? T : F;
      }
      case FormulaKind::Eq: {
        TriElt a = eval_term3(w, f->terms[0], env);
        TriElt b = eval_term3(w, f->terms[1], env);
        if (a.defined == F || b.defined == F) return F;
        if (a.defined == U || b.defined == U) return U;
        return a.elt == b.elt ? T : F;
      }
      case FormulaKind::Not:
        return tri_not(eval3(w, f->lhs, env));
      case FormulaKind::And:
        return tri_and(eval3(w, f->lhs, env), eval3(w, f->rhs, env));
      case FormulaKind::Exists: {
        Tri acc = F;
        for (int d : M_.worlds[w].domain) {
          auto saved = env.find(f->var) != env.end()
                           ? std::optional<int>(env[f->var])
                           : std::nullopt;
          env[f->var] = d;
          acc = tri_or(acc, eval3(w, f->lhs, env));
          if (saved)
            env[f->var] = *saved;
          else
            env.erase(f->var);
          if (acc == T) return T;
        }
        return acc;
      }
      case FormulaKind::DExists: {
        int cur = env.at(f->var);
        Tri acc = F;
        for (int d : M_.worlds[w].domain) {
          if (d == cur) continue;
          env[f->var] = d;
          acc = tri_or(acc, eval3(w, f->lhs, env));
          env[f->var] = cur;
          if (acc == T) return T;
        }
        return acc;
      }
      case FormulaKind::Dia: {
        Tri acc = F;
        for (int v : M_.worlds[w].succ[f->modality - 1]) {
          acc = tri_or(acc, eval3(v, f->lhs, env));
          if (acc == T) return T;
        }
        return acc;
      }
    }
    return F;
  }

  FormulaRef phi_;
  int n_;
  bool total_;
  int max_worlds_, max_domain_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  oracle_detail::Sig sig_;
  Interpretation M_;
  std::vector<bool> assigned_;
};

inline std::optional<Interpretation> brute_force_sat_s5(
    FormulaRef phi, int n_mod, bool total_consts, int max_worlds,
    int max_domain, std::uint64_t budget = 200'000'000ull) {
  S5Oracle o(phi, n_mod, total_consts, max_worlds, max_domain, budget);
  return o.search();
}

} // namespace qml
