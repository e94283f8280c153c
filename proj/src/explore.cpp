// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/explore.hpp"

#include <algorithm>
#include <random>

#include "dbft/sim.hpp"

namespace dbft {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t run) {
  // splitmix64 over the pair, so neighbouring runs decorrelate
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (run + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint32_t pick(std::mt19937_64& rng, uint32_t bound) {
  return static_cast<uint32_t>(rng() % bound);
}

std::vector<uint32_t> shuffled_others(std::mt19937_64& rng, uint32_t n) {
  std::vector<uint32_t> out;
  for (uint32_t i = 1; i < n; ++i) out.push_back(i);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Speaker equivocation with a harvester that completes the losing side's
// certificate after the view change.
void shape_split_speaker(std::mt19937_64& rng, Scenario& sc) {
  uint32_t n = sc.config.n;
  auto others = shuffled_others(rng, n);
  uint32_t split = 1 + pick(rng, n - 2);  // both partitions non-empty
  std::vector<uint32_t> part_a(others.begin(), others.begin() + split);
  std::vector<uint32_t> part_b(others.begin() + split, others.end());
  std::sort(part_a.begin(), part_a.end());
  std::sort(part_b.begin(), part_b.end());
  uint32_t x = others[pick(rng, n - 1)];
  bool x_in_a = std::find(part_a.begin(), part_a.end(), x) != part_a.end();

  sc.plan.controlled = {0, x};
  Directive eq;
  eq.node = 0;
  eq.action = AdvAction::Equivocate;
  eq.when = AdvWhen::OnPropose;
  eq.view = 0;
  eq.block_a = "blk1";
  eq.part_a = part_a;
  eq.block_b = "blk2";
  eq.part_b = part_b;
  sc.plan.directives.push_back(eq);

  Directive hv;
  hv.node = x;
  hv.action = AdvAction::Harvest;
  hv.when = AdvWhen::Always;
  hv.block_a = x_in_a ? "blk2" : "blk1";  // archive the side it did not join
  sc.plan.directives.push_back(hv);

  for (uint32_t nid : {0u, x}) {
    Directive sil;
    sil.node = nid;
    sil.action = AdvAction::Silence;
    sil.when = AdvWhen::OnDeliver;
    sil.kind = MsgKind::Prepare;
    sil.view = 1 + pick(rng, 2);
    if (pick(rng, 4) == 0) sil.view = 1;  // bias toward the first new view
    sc.plan.directives.push_back(sil);
  }

  Directive fg;
  fg.node = x;
  fg.action = AdvAction::ForgeLate;
  fg.when = AdvWhen::OnPublish;
  fg.block_a = hv.block_a;
  sc.plan.directives.push_back(fg);
}

// Slow links starve the first view of a quorum; a controlled straggler
// adopts the stale proposal once the height has moved on.
void shape_starved_view(std::mt19937_64& rng, Scenario& sc) {
  uint32_t n = sc.config.n;
  uint32_t q = sc.config.quorum();
  uint32_t min_slow = n - q + 1;  // leave fewer than q timely responders
  uint32_t slow = min_slow + pick(rng, n - 1 - min_slow);
  auto others = shuffled_others(rng, n);
  std::set<ActorId> late;
  std::vector<uint32_t> late_ids(others.begin(), others.begin() + slow);
  std::sort(late_ids.begin(), late_ids.end());
  for (uint32_t i : late_ids) late.insert(ActorId::delegate(i));
  uint32_t x = late_ids[pick(rng, slow)];

  sc.plan.controlled = {x};
  Directive hv;
  hv.node = x;
  hv.action = AdvAction::Harvest;
  hv.when = AdvWhen::Always;
  hv.block_a = honest_tag(0, 0);
  sc.plan.directives.push_back(hv);
  Directive ad;
  ad.node = x;
  ad.action = AdvAction::AdoptStale;
  ad.when = AdvWhen::OnDeliver;
  ad.kind = MsgKind::Prepare;
  ad.stale_only = true;
  sc.plan.directives.push_back(ad);
  Directive fg;
  fg.node = x;
  fg.action = AdvAction::ForgeLate;
  fg.when = AdvWhen::OnHarvest;
  fg.block_a = honest_tag(0, 0);
  sc.plan.directives.push_back(fg);

  Tick delta = 3 * sc.config.t_star + pick(rng, 8 * sc.config.t_star);
  FaultRule prep;
  prep.kind = MsgKind::Prepare;
  prep.from = ActorId::delegate(0);
  prep.to = late;
  prep.window_to = 20;
  prep.action = FaultRule::Action::Delay;
  prep.delay = delta;
  sc.rules.push_back(prep);
  FaultRule resp;
  resp.kind = MsgKind::Response;
  resp.block_tag = honest_tag(0, 0);
  resp.to = late;
  resp.window_to = 20;
  resp.action = FaultRule::Action::Delay;
  resp.delay = delta;
  sc.rules.push_back(resp);
}

// Unstructured faults: silences plus random link trouble.
void shape_noise(std::mt19937_64& rng, Scenario& sc) {
  uint32_t n = sc.config.n;
  uint32_t f = sc.config.max_faulty();
  uint32_t count = 1 + pick(rng, f);
  std::set<uint32_t> picked;
  while (picked.size() < count) picked.insert(pick(rng, n));
  sc.plan.controlled.assign(picked.begin(), picked.end());
  for (uint32_t nid : sc.plan.controlled) {
    switch (pick(rng, 3)) {
      case 0: {
        Directive sil;
        sil.node = nid;
        sil.action = AdvAction::Silence;
        sil.when = AdvWhen::OnDeliver;
        sil.kind = pick(rng, 2) ? MsgKind::Prepare : MsgKind::Response;
        sil.view = pick(rng, 3);
        sc.plan.directives.push_back(sil);
        break;
      }
      case 1: {
        Directive hv;
        hv.node = nid;
        hv.action = AdvAction::Harvest;
        hv.when = AdvWhen::Always;
        hv.block_a = honest_tag(0, pick(rng, 2));
        sc.plan.directives.push_back(hv);
        break;
      }
      default: {
        Directive hon;
        hon.node = nid;
        hon.action = AdvAction::ActHonest;
        hon.when = AdvWhen::Always;
        sc.plan.directives.push_back(hon);
        break;
      }
    }
  }
  uint32_t nrules = pick(rng, 3);
  for (uint32_t i = 0; i < nrules; ++i) {
    FaultRule r;
    switch (pick(rng, 4)) {
      case 0: r.kind = MsgKind::Prepare; break;
      case 1: r.kind = MsgKind::Response; break;
      case 2: r.kind = MsgKind::Commit; break;
      default: r.kind = MsgKind::ViewChange; break;
    }
    if (pick(rng, 2)) r.from = ActorId::delegate(pick(rng, n));
    uint32_t nto = pick(rng, 3);
    for (uint32_t j = 0; j < nto; ++j) r.to.insert(ActorId::delegate(pick(rng, n)));
    r.window_from = i * 61;  // windows never coincide, so matchers never clash
    r.window_to = r.window_from + 1 + pick(rng, 59);
    if (pick(rng, 3) == 0) {
      r.action = FaultRule::Action::Drop;
    } else {
      r.action = FaultRule::Action::Delay;
      r.delay = 1 + pick(rng, 4 * sc.config.t_star);
    }
    sc.rules.push_back(r);
  }
}

}  // namespace

Scenario random_scenario(const Config& base, uint64_t seed, uint64_t run_index,
                         Tick max_ticks) {
  Scenario sc;
  sc.config = base;
  sc.config.seed = mix_seed(seed, run_index);
  sc.run.heights = 1;
  sc.run.max_ticks = max_ticks;
  std::mt19937_64 rng(sc.config.seed);
  uint32_t n = sc.config.n;
  uint32_t f = sc.config.max_faulty();
  uint32_t roll = pick(rng, 10);
  if (n >= 4 && f >= 2 && roll < 4) {
    shape_split_speaker(rng, sc);
  } else if (n >= 4 && f >= 1 && roll < 7) {
    shape_starved_view(rng, sc);
  } else if (f >= 1) {
    shape_noise(rng, sc);
  }
  return sc;
}

Verdict run_and_evaluate(const Scenario& sc) {
  Simulation sim(sc);
  sim.run();
  return evaluate(sim);
}

bool same_outcome(const Verdict& a, const Verdict& b) {
  if (a.forked != b.forked) return false;
  if (!a.forked) return true;
  const ForkReport& fa = *a.fork;
  const ForkReport& fb = *b.fork;
  auto key = [](const ForkReport& f) {
    return std::make_tuple(f.height, f.cert_a.block.tag, f.cert_a.signers(),
                           f.cert_b.block.tag, f.cert_b.signers());
  };
  return key(fa) == key(fb);
}

Scenario minimize_counterexample(const Scenario& sc) {
  auto forks = [](const Scenario& candidate) {
    try {
      return run_and_evaluate(candidate).forked;
    } catch (const std::exception&) {
      return false;
    }
  };
  Scenario best = sc;
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t i = 0; i < best.plan.directives.size(); ++i) {
      Scenario cand = best;
      cand.plan.directives.erase(cand.plan.directives.begin() + i);
      if (forks(cand)) {
        best = cand;
        improved = true;
        break;
      }
    }
    if (improved) continue;
    for (size_t i = 0; i < best.rules.size(); ++i) {
      Scenario cand = best;
      cand.rules.erase(cand.rules.begin() + i);
      if (forks(cand)) {
        best = cand;
        improved = true;
        break;
      }
    }
    if (improved) continue;
    for (size_t i = 0; i < best.plan.controlled.size(); ++i) {
      uint32_t node = best.plan.controlled[i];
      bool used = false;
      for (const Directive& d : best.plan.directives) used |= d.node == node;
      if (used) continue;
      Scenario cand = best;
      cand.plan.controlled.erase(cand.plan.controlled.begin() + i);
      if (forks(cand)) {
        best = cand;
        improved = true;
        break;
      }
    }
  }
  return best;
}

ExploreResult explore(const Config& base, const ExploreBudget& budget,
                      uint64_t seed) {
  ExploreResult res;
  res.runs = budget.runs;
  for (uint64_t i = 0; i < budget.runs; ++i) {
    Scenario sc = random_scenario(base, seed, i, budget.max_ticks);
    bool forked = false;
    try {
      forked = run_and_evaluate(sc).forked;
    } catch (const std::exception&) {
      continue;  // contradictory random rules: not a finding
    }
    if (!forked) continue;
    res.fork_runs.push_back(i);
    if (!res.first_fork) {
      res.first_fork = i;
      res.original = sc;
    }
  }
  if (res.original) {
    res.minimized = minimize_counterexample(*res.original);
    res.minimized_verdict = run_and_evaluate(*res.minimized);
  }
  return res;
}

}  // namespace dbft
