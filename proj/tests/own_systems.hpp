// Random exists-forall systems over interval templates, built around a known
// assignment: templates form a tree of shrinking (flow) and splitting
// children, and every constraint holds under the planted assignment.
#pragma once

#include "impverif/own_infer.hpp"

#include <random>
#include <string>
#include <vector>

struct PlantedSystem {
  std::vector<impverif::OwnConstraint> constraints;
  impverif::SortMap unknowns;
  impverif::OwnSolution truth;
  std::vector<std::string> universals;
};

namespace ownsys {

using namespace impverif;

struct Tpl {
  std::vector<std::string> lo, hi;  // coefficient names, constant first
  std::string o;
  Term lo_t, hi_t;
};

inline Formula atom(const Term& a, Cmp c, const Term& b) { return Formula::atom(a, c, b); }

inline Formula covers(const Tpl& a, const Tpl& b) {
  return Formula::conj({atom(a.lo_t, Cmp::Le, b.lo_t), atom(b.hi_t, Cmp::Le, a.hi_t),
                        atom(Term::var(a.o), Cmp::Ge, Term::var(b.o))});
}

}  // namespace ownsys

inline PlantedSystem planted_system(uint64_t seed) {
  using namespace impverif;
  using namespace ownsys;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  PlantedSystem ps;
  ps.universals = pick(0, 2) == 0 ? std::vector<std::string>{"x", "y"} : std::vector<std::string>{"x"};
  std::vector<Formula> g;
  for (const auto& u : ps.universals) g.push_back(atom(Term::var(u), Cmp::Ge, Term(pick(0, 1))));
  Formula guard = and_all(g);

  std::vector<Tpl> ts;
  std::vector<std::vector<int>> lo_v, hi_v;  // planted coefficients
  auto make = [&](std::vector<int> lo, std::vector<int> hi, Rational o) {
    Tpl t;
    std::string id = std::to_string(ts.size());
    t.o = "$o" + id;
    ps.unknowns[t.o] = Sort::Real;
    ps.truth.values[t.o] = o;
    for (size_t k = 0; k <= ps.universals.size(); ++k) {
      t.lo.push_back("$c" + id + "_" + std::to_string(k));
      t.hi.push_back("$d" + id + "_" + std::to_string(k));
      ps.unknowns[t.lo.back()] = Sort::Int;
      ps.unknowns[t.hi.back()] = Sort::Int;
      ps.truth.values[t.lo.back()] = lo[k];
      ps.truth.values[t.hi.back()] = hi[k];
    }
    t.lo_t = Term::var(t.lo[0]);
    t.hi_t = Term::var(t.hi[0]);
    for (size_t k = 0; k < ps.universals.size(); ++k) {
      t.lo_t += Term::var(t.lo[k + 1]) * Term::var(ps.universals[k]);
      t.hi_t += Term::var(t.hi[k + 1]) * Term::var(ps.universals[k]);
    }
    ts.push_back(t);
    lo_v.push_back(std::move(lo));
    hi_v.push_back(std::move(hi));
    return static_cast<int>(ts.size()) - 1;
  };
  auto own_of = [&](int k) { return ps.truth.values.at(ts[k].o); };

  // Root: [0, a + b*x] with full ownership.
  std::vector<int> lo0(ps.universals.size() + 1, 0), hi0(ps.universals.size() + 1, 0);
  hi0[0] = pick(0, 4);
  for (size_t k = 1; k < hi0.size(); ++k) hi0[k] = pick(0, 2);
  make(lo0, hi0, 1);

  std::vector<Formula> bodies;
  int nsel = 0;
  int steps = pick(2, 5);
  for (int s = 0; s < steps; ++s) {
    int parent = pick(0, static_cast<int>(ts.size()) - 1);
    if (pick(0, 1) == 0) {  // flow to a narrower, weaker copy
      auto lo = lo_v[parent], hi = hi_v[parent];
      lo[0] += pick(0, 1);
      hi[0] -= pick(0, 1);
      Rational o = pick(0, 2) == 0 ? own_of(parent) / 2 : own_of(parent);
      int c = make(lo, hi, o);
      bodies.push_back(covers(ts[parent], ts[c]));
    } else {  // split at offset z: disjoint when the parent is long enough, else halve the ownership
      int z = pick(1, 2);
      auto lo = lo_v[parent], hi = hi_v[parent];
      bool long_enough = hi[0] - lo[0] >= z - 1;
      for (size_t k = 1; k < lo.size(); ++k) long_enough &= hi[k] >= lo[k];
      bool disjoint = long_enough && pick(0, 1) == 0;
      std::vector<int> phi = hi, clo = lo, chi = hi;
      if (disjoint) {
        phi = lo;
        phi[0] += z - 1;
      } else {
        clo[0] -= z;
      }
      chi[0] -= z;
      Rational o = disjoint ? own_of(parent) : own_of(parent) / 2;
      int p = make(lo, phi, o);
      int c = make(clo, chi, o);
      Term zt(z);
      bodies.push_back(covers(ts[parent], ts[p]));
      bodies.push_back(Formula::conj({atom(ts[parent].lo_t - zt, Cmp::Le, ts[c].lo_t),
                                      atom(ts[c].hi_t, Cmp::Le, ts[parent].hi_t - zt),
                                      atom(Term::var(ts[parent].o), Cmp::Ge, Term::var(ts[c].o))}));
      std::string sel = "$s" + std::to_string(nsel++);
      ps.unknowns[sel] = Sort::Int;
      std::vector<Formula> cases = {
          atom(Term::var(ts[parent].o), Cmp::Ge, Term::var(ts[p].o) + Term::var(ts[c].o)),
          atom(ts[c].hi_t, Cmp::Lt, ts[p].lo_t - zt),
          atom(ts[p].hi_t - zt, Cmp::Lt, ts[c].lo_t),
      };
      std::vector<Formula> alts;
      for (size_t k = 0; k < cases.size(); ++k)
        alts.push_back(Formula::conj(atom(Term::var(sel), Cmp::Eq, Term(static_cast<int>(k))), cases[k]));
      ps.truth.values[sel] = disjoint ? 2 : 0;
      bodies.push_back(Formula::disj(alts));
    }
  }
  // Pin the root: full ownership of index 0, as an assignment would require.
  bodies.push_back(Formula::conj({atom(Term::var(ts[0].o), Cmp::Eq, Term(1)), atom(ts[0].lo_t, Cmp::Le, Term(0)),
                                  atom(Term(0), Cmp::Le, ts[0].hi_t)}));

  for (auto& b : bodies) {
    OwnConstraint c;
    c.fn = "gen";
    c.schema = 'a';
    c.site = "planted";
    c.universals = ps.universals;
    c.guard = guard;
    c.body = std::move(b);
    ps.constraints.push_back(std::move(c));
  }
  return ps;
}
