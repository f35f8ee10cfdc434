// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Everything runs offline against the scripted backend.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "negotia/cli.hpp"
#include "negotia/errors.hpp"
#include "negotia/outcome.hpp"
#include "negotia/search.hpp"
#include "negotia/selectors.hpp"
#include "negotia/simulation.hpp"
#include "support.hpp"

using namespace negotia;
using namespace negotia::testing;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& name, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= limit_s) {
    v.pass = false;
    v.detail += " [too slow]";
  }
  if (!v.pass) ++failures;
  std::ostringstream line;
  line.precision(3);
  line << std::fixed << (v.pass ? "PASS" : "FAIL") << " " << n << " " << name << " (" << secs << "s / " << limit_s
       << "s) " << v.detail;
  std::cout << line.str() << std::endl;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

// --- 1 ---------------------------------------------------------------------

Verdict reward_exactness() {
  const PriceBounds b = product_bounds();  // 30 / 50
  struct Case {
    NegotiationOutcome o;
    double expected;
  };
  const Case cases[] = {
      {{true, b.buyer_init + (b.seller_init - b.buyer_init) / 2, 1, 0}, 0.7 * 0.5 + 0.1 + 0.1 + 0.0},
      {{false, std::nullopt, -1, -1}, -0.3},
      {{true, b.seller_init, 1, 1}, 1.0},
  };
  std::string detail;
  bool ok = true;
  for (const auto& c : cases) {
    const double r = reward(c.o, b, RewardWeights{0.7, 0.1, 0.1, 0.1});
    detail += fmt(r) + " ";
    ok = ok && std::abs(r - c.expected) <= 1e-12;
  }
  return {ok, "rewards " + detail};
}

// --- 2 ---------------------------------------------------------------------

Verdict paired_identity() {
  auto points = probe(20, 2024);
  const auto settings = probe_settings();
  std::size_t zero = 0;
  for (auto& p : points) {
    if (value_of_remediation(p, p.silver_remediation, settings) == 0.0) ++zero;
  }
  return {zero == points.size() && points.size() == 20, std::to_string(zero) + "/20 points give exactly 0"};
}

// --- 3 ---------------------------------------------------------------------

Verdict oracle_monotonicity() {
  const auto pool = quality_pool();
  ImpactEstimator est(pool, scripted_policy(), probe(8, 3), probe_settings(), 4);
  std::vector<std::pair<double, double>> qi;  // (quality, impact)
  for (const auto& f : quality_fixture()) qi.emplace_back(f.quality, est.impact(ExemplarSet{{f.id}, std::nullopt}));
  int ordered = 0, pairs = 0;
  for (std::size_t i = 0; i < qi.size(); ++i) {
    for (std::size_t j = i + 1; j < qi.size(); ++j) {
      ++pairs;
      const auto& hi = qi[i].first > qi[j].first ? qi[i] : qi[j];
      const auto& lo = qi[i].first > qi[j].first ? qi[j] : qi[i];
      if (hi.second > lo.second) ++ordered;
    }
  }
  std::string detail = std::to_string(ordered) + "/" + std::to_string(pairs) + " pairs strictly ordered; impacts";
  for (const auto& [q, v] : qi) detail += " q" + fmt(q) + "=" + fmt(v);
  return {ordered == 15 && pairs == 15, detail};
}

// --- 4 ---------------------------------------------------------------------

Verdict search_oracle() {
  const auto pool = quality_pool();
  ImpactEstimator est(pool, scripted_policy(), probe(8, 4), probe_settings(), 4);
  const auto ranked = rank_individuals(est, pool.size(), 11);
  const auto split = split_candidates(ranked, 2);

  std::map<std::vector<std::string>, double> memo;
  auto impact = [&](const ExemplarSet& s) {
    auto it = memo.find(s.members);
    if (it != memo.end()) return it->second;
    return memo[s.members] = est.impact(s);
  };
  const auto [best, trace] = search_optimal_set(split.init, split.candidates, split.candidates.size(), impact);

  // Exhaustive: every set the traversal could construct, i.e. position 0
  // from {init[0]} + S_CAND and position 1 from {init[1]} + S_CAND, distinct.
  // Ties keep the earliest set in traversal order, starting with S_INIT.
  std::vector<std::string> p0{split.init[0]}, p1{split.init[1]};
  p0.insert(p0.end(), split.candidates.begin(), split.candidates.end());
  p1.insert(p1.end(), split.candidates.begin(), split.candidates.end());
  std::vector<std::string> oracle = split.init;
  double oracle_v = impact(ExemplarSet{split.init, std::nullopt});
  std::size_t enumerated = 0;
  for (const auto& x : p0) {
    for (const auto& y : p1) {
      if (x == y) continue;
      ++enumerated;
      const double v = impact(ExemplarSet{{x, y}, std::nullopt});
      if (v > oracle_v) {
        oracle_v = v;
        oracle = {x, y};
      }
    }
  }
  double trace_max = trace.root.impact;
  for (const auto& e : trace.evaluations) trace_max = std::max(trace_max, e.impact);

  const bool ok = best.members == oracle && best.value_impact && *best.value_impact == oracle_v &&
                  *best.value_impact == trace_max;
  return {ok, "search [" + best.members[0] + "," + best.members[1] + "]=" + fmt(*best.value_impact) + " oracle [" +
                  oracle[0] + "," + oracle[1] + "]=" + fmt(oracle_v) + " over " + std::to_string(enumerated) +
                  " sets; trace max " + fmt(trace_max)};
}

// --- 5 ---------------------------------------------------------------------

Verdict pruning_accounting() {
  const auto pool = quality_pool();
  // Adversarial order: S_INIT holds the two best exemplars, so the first
  // replacement at the root can only lower the value impact.
  const std::vector<std::string> init{"ex-d", "ex-a"};
  const std::vector<std::string> cand{"ex-c", "ex-f", "ex-b", "ex-e"};
  ImpactEstimator est(pool, scripted_policy(), probe(8, 5), probe_settings(), 4);
  const auto [best, trace] = search_optimal_set(init, cand, 1, [&](const ExemplarSet& s) { return est.impact(s); });
  const bool ok = trace.evaluations.size() == 1 && trace.pruning.size() == 1 && trace.evaluations[0].delta <= 0 &&
                  best.members == init;
  return {ok, std::to_string(trace.evaluations.size()) + " child evaluation(s), " +
                  std::to_string(trace.pruning.size()) + " pruning event(s), first delta " +
                  (trace.evaluations.empty() ? std::string("n/a") : fmt(trace.evaluations[0].delta))};
}

// --- 6 ---------------------------------------------------------------------

Verdict injection_rate() {
  SimulationConfig cfg;
  cfg.p_c = 0.4;
  cfg.seed = 6;
  auto arena = product_arena();
  const auto corpus = simulate_many(arena, nullptr, cfg, 1000, 4, "rate-");
  std::size_t seller_turns = 0, flagged = 0;
  for (const auto& d : corpus) {
    if (d.error) return {false, "rollout " + d.id + " failed: " + *d.error};
    // The opening seller line is hard-coded and never tossed.
    for (std::size_t i = 3; i < d.turns.size(); ++i) {
      if (d.turns[i].speaker != Speaker::seller) continue;
      ++seller_turns;
      flagged += d.turns[i].violation ? 1 : 0;
    }
  }
  const double f = static_cast<double>(flagged) / static_cast<double>(seller_turns);
  return {f >= 0.37 && f <= 0.43,
          "frequency " + fmt(f) + " (" + std::to_string(flagged) + "/" + std::to_string(seller_turns) + ")"};
}

// --- 7 ---------------------------------------------------------------------

// Independent brute force: 3-gram counts into 256 FNV-1a buckets, cosine
// compared exactly in integers (dot^2 * |b|^2 cross-multiplied).
struct Counts {
  std::map<std::uint64_t, std::int64_t> c;
  std::int64_t sq = 0;
};

Counts oracle_counts(const std::string& text) {
  Counts out;
  for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t j = i; j < i + 3; ++j) {
      h ^= static_cast<unsigned char>(text[j]);
      h *= 1099511628211ULL;
    }
    ++out.c[h % 256];
  }
  for (const auto& [k, v] : out.c) out.sq += v * v;
  return out;
}

std::string oracle_text(const std::vector<Turn>& history, const std::string& violation) {
  std::string s;
  for (const auto& t : history) s += (t.speaker == Speaker::buyer ? "buyer: " : "seller: ") + t.text + "\n";
  return s + "seller: " + violation;
}

std::vector<std::string> oracle_top_k(const Counts& q, const std::vector<std::pair<std::string, Counts>>& items,
                                      std::size_t k) {
  struct Row {
    std::string id;
    std::int64_t dot;
    std::int64_t sq;
  };
  std::vector<Row> rows;
  for (const auto& [id, c] : items) {
    std::int64_t dot = 0;
    for (const auto& [b, v] : c.c) {
      auto it = q.c.find(b);
      if (it != q.c.end()) dot += v * it->second;
    }
    rows.push_back({id, dot, c.sq});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const bool za = a.sq == 0, zb = b.sq == 0;  // zero norm ranks last
    if (za != zb) return zb;
    if (!za) {
      const __int128 lhs = static_cast<__int128>(a.dot) * a.dot * b.sq;
      const __int128 rhs = static_cast<__int128>(b.dot) * b.dot * a.sq;
      if (lhs != rhs) return lhs > rhs;
    }
    return a.id < b.id;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(rows[i].id);
  return out;
}

Verdict retrieval_equivalence() {
  static const char* words[] = {"price", "deal", "unit", "$40", "quality", "insulting", "final", "offer",
                                "time",  "we",   "you",  "cannot", "accept", "partner", "ok", "no"};
  std::mt19937_64 rng(7);
  auto sentence = [&] {
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + std::string(words[rng() % 16]);
    return s;
  };
  int matched = 0;
  std::size_t ties = 0;
  HashedNgramEmbedder emb(256, 3);
  for (int fixture = 0; fixture < 50; ++fixture) {
    std::vector<Exemplar> items;
    for (int i = 0; i < 20; ++i) {
      Exemplar e;
      e.id = "x" + std::to_string(100 + (i * 7) % 20);  // pool order differs from id order
      if (!items.empty() && rng() % 5 == 0) {
        const auto& src = items[rng() % items.size()];  // duplicate content: forces a tie
        e.history = src.history;
        e.violation_text = src.violation_text;
        ++ties;
      } else {
        const int h = static_cast<int>(rng() % 4);
        for (int t = 0; t < h; ++t) e.history.push_back({t % 2 ? Speaker::seller : Speaker::buyer, sentence(), false, {}});
        e.violation_text = sentence();
      }
      e.remediation_text = "fine";
      items.push_back(std::move(e));
    }
    std::vector<Turn> qh;
    const int h = static_cast<int>(rng() % 4);
    for (int t = 0; t < h; ++t) qh.push_back({t % 2 ? Speaker::seller : Speaker::buyer, sentence(), false, {}});
    const std::string qv = sentence();
    const std::size_t k = 1 + rng() % 20;

    std::vector<std::pair<std::string, Counts>> oc;
    for (const auto& e : items) oc.emplace_back(e.id, oracle_counts(oracle_text(e.history, e.violation_text)));
    const auto expected = oracle_top_k(oracle_counts(oracle_text(qh, qv)), oc, k);
    const auto got = select_retrieval(ExemplarPool(items), qh, qv, k, emb).members;
    matched += got == expected ? 1 : 0;
  }
  return {matched == 50, std::to_string(matched) + "/50 fixtures match (" + std::to_string(ties) + " forced ties)"};
}

// --- 8 ---------------------------------------------------------------------

Verdict determinism() {
  const auto dir = scratch_dir("acceptance-determinism");
  std::vector<std::string> files;
  for (const char* workers : {"1", "1", "4", "8"}) {
    const auto out = (dir / ("c" + std::to_string(files.size()) + ".jsonl")).string();
    std::istringstream in;
    std::ostringstream o, e;
    const int code = run({"--workers", workers, "simulate", "--backend", "scripted", "--seed", "7", "--n", "20",
                          "--out", out},
                         in, o, e);
    if (code != 0) return {false, "simulate exited " + std::to_string(code) + ": " + e.str()};
    files.push_back(read_file(out));
  }
  std::filesystem::remove_all(dir);
  const bool same = std::all_of(files.begin(), files.end(), [&](const std::string& f) { return f == files[0]; });
  return {same && !files[0].empty(),
          std::to_string(files.size()) + " runs (workers 1,1,4,8), " + std::to_string(files[0].size()) + " bytes each" +
              (same ? ", identical" : ", DIFFERENT")};
}

// --- 9 ---------------------------------------------------------------------

std::size_t count_line_starts(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) {
    if (p == 0 || s[p - 1] == '\n') ++n;
  }
  return n;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + needle.size())) ++n;
  return n;
}

Verdict prompt_fidelity() {
  std::vector<Exemplar> z;
  for (int i = 0; i < 8; ++i) z.push_back(make_exemplar("k" + std::to_string(i), 0.5));
  const auto policy = scripted_policy().with_exemplars(z);
  const std::vector<Turn> history{buyer("Hello, does your esteemed company have a special industrial product?"),
                                  seller("The unit price for this industrial product is $50."),
                                  buyer("Would you consider $30 per unit?")};
  const auto msgs = remediation_prompt(policy, history, "Stop wasting my time. $46 per unit is final.");
  std::string all;
  for (const auto& m : msgs) all += m.content + "\n";

  const std::size_t blocks = count_line_starts(all, "# Dialogue:");
  // Exemplar region: first block header at a line start, up to the
  // current-dialogue header. The instructions quote both markers inline.
  const auto header = all.find("\n# Dialogue:");
  const auto begin = header == std::string::npos ? header : header + 1;
  const auto end = all.find("Now, the current negotiation dialogue is as follows:");
  const std::size_t markers =
      begin == std::string::npos || end == std::string::npos || end < begin
          ? 0
          : count(all.substr(begin, end - begin), "[violation]");
  std::vector<std::string> residual;
  for (auto w : wildcard::all) {
    if (all.find(w) != std::string::npos) residual.emplace_back(w);
  }
  const bool ok = blocks == 8 && markers == 8 && residual.empty();
  return {ok, std::to_string(blocks) + " blocks, " + std::to_string(markers) + " markers, " +
                  std::to_string(residual.size()) + " residual wildcards"};
}

// --- 10 --------------------------------------------------------------------

Verdict end_to_end() {
  auto arena = product_arena();
  auto mean_reward = [&](double p_c, const Remediator* rem) {
    SimulationConfig cfg;
    cfg.p_c = p_c;
    cfg.remediation_enabled = rem != nullptr;
    cfg.seed = 10;
    const auto corpus = simulate_many(arena, rem, cfg, 200, 4, "e2e-");
    double sum = 0;
    for (const auto& d : corpus) {
      if (d.error) throw Error("rollout " + d.id + " failed: " + *d.error);
      sum += dialogue_reward(d);
    }
    return sum / static_cast<double>(corpus.size());
  };
  const Remediator q09 = [](std::span<const Turn>, std::string_view x) { return scripted_remediation(x, 0.9); };
  const double clean = mean_reward(0.0, nullptr);
  const double remediated = mean_reward(0.4, &q09);
  const double raw = mean_reward(0.4, nullptr);
  const bool ok = clean - remediated >= 0.02 && remediated - raw >= 0.02;
  return {ok, "no-violation " + fmt(clean) + ", remediated(q=0.9) " + fmt(remediated) + ", unremediated " + fmt(raw)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  criterion(1, "reward exactness", 1, reward_exactness);
  criterion(2, "paired-seed identity", 10, paired_identity);
  criterion(3, "oracle monotonicity", 30, oracle_monotonicity);
  criterion(4, "search oracle equivalence", 60, search_oracle);
  criterion(5, "pruning accounting", 5, pruning_accounting);
  criterion(6, "violation-injection rate", 60, injection_rate);
  criterion(7, "retrieval equivalence", 10, retrieval_equivalence);
  criterion(8, "determinism", 30, determinism);
  criterion(9, "prompt fidelity", 1, prompt_fidelity);
  criterion(10, "end-to-end sanity", 120, end_to_end);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
