#include "negotia/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <ctime>
#include <iostream>
#include <thread>

#include "negotia/arena.hpp"
#include "negotia/backends.hpp"
#include "negotia/errors.hpp"
#include "negotia/outcome.hpp"
#include "negotia/remediate.hpp"
#include "negotia/search.hpp"
#include "negotia/selectors.hpp"
#include "negotia/valueimpact.hpp"

namespace negotia {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Manifests

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

namespace {

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json digests(const std::vector<fs::path>& paths) {
  Json arr = Json::array();
  for (const auto& p : paths) {
    Json e;
    e["path"] = p.string();
    e["sha256"] = fs::exists(p) ? Json(sha256_hex(read_file(p))) : Json(nullptr);
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace

Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["started"] = iso_time(m.started);
  j["finished"] = iso_time(m.finished);
  j["inputs"] = digests(m.inputs);
  j["outputs"] = digests(m.outputs);
  j["counts"] = m.counts;
  return j;
}

void write_manifests(const RunManifest& m) {
  const Json j = to_json(m);
  for (const auto& out : m.outputs) save_json_file(manifest_path(out), j);
}

// ---------------------------------------------------------------------------
// Interactive

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

InteractiveResult interactive_session(Speaker human, Arena& arena, const Remediator& remediator,
                                      std::size_t max_turns, std::string id, std::istream& in, std::ostream& out) {
  InteractiveResult r;
  Dialogue& d = r.transcript;
  d.id = std::move(id);
  d.topic = arena.topic();
  d.bounds = arena.bounds();

  bool quit = false;
  try {
    d.turns = arena.opening();
    for (const auto& t : d.turns) out << to_string(t.speaker) << ": " << t.text << '\n';
    out << "You are the " << to_string(human) << ". Commands: /flag <text> (seller only), /quit\n";

    while (!moderator_end(arena, d.turns, max_turns)) {
      const Speaker next = d.turns.size() % 2 == 0 ? Speaker::buyer : Speaker::seller;
      if (next != human) {
        Turn t{next, arena.speak(next, d.turns, false), false, std::nullopt};
        out << to_string(next) << ": " << t.text << '\n';
        d.turns.push_back(std::move(t));
        continue;
      }

      out << to_string(human) << "> " << std::flush;
      std::string line;
      if (!std::getline(in, line)) {
        quit = true;
        break;
      }
      line = trim(line);
      if (line == "/quit") {
        quit = true;
        break;
      }
      bool flagged = false;
      if (line.rfind("/flag", 0) == 0) {
        if (human != Speaker::seller) {
          out << "/flag applies only to the seller role\n";
          continue;
        }
        flagged = true;
        line = trim(std::string_view(line).substr(5));
      } else if (!line.empty() && line.front() == '/') {
        out << "unknown command " << line << '\n';
        continue;
      }
      if (line.empty()) continue;

      Turn t{human, line, flagged, std::nullopt};
      if (flagged) {
        ++r.flags;
        std::string y;
        try {
          y = remediator(d.turns, line);
        } catch (const Error& e) {
          out << "remediator failed: " << e.what() << '\n';
        }
        bool take = false;
        if (!y.empty()) {
          out << "original:    " << line << '\n' << "remediation: " << y << '\n';
          while (true) {
            out << "keep [o]riginal or use [r]emediation? " << std::flush;
            std::string choice;
            if (!std::getline(in, choice)) break;
            choice = trim(choice);
            if (choice == "o" || choice == "r") {
              take = choice == "r";
              break;
            }
          }
        }
        d.choices.push_back({d.turns.size(), take});
        if (take) {
          ++r.accepted;
          t.original_text = line;
          t.text = y;
        }
      }
      d.turns.push_back(std::move(t));
      arena.observe(human, d.turns);
    }

    auto outcome = arena.assess(d.turns);
    if (quit || (d.turns.size() >= max_turns && !arena.ended(d.turns))) {
      outcome.deal = false;
      outcome.price.reset();
    }
    d.outcome = outcome;
  } catch (const Error& e) {
    d.error = e.what();
    d.outcome.reset();
    out << "session aborted: " << e.what() << '\n';
  }

  out << "flags: " << r.flags << ", remediation accepted: " << r.accepted;
  if (r.flags > 0) out << " (acceptance rate " << static_cast<double>(r.accepted) / static_cast<double>(r.flags) << ")";
  out << '\n';
  return r;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Globals {
  std::size_t workers = 1;
  std::string cache_dir = ".negotia-cache";
  std::string api_base = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::string prompts_dir = default_prompts_dir().string();
  std::string backend = "scripted";
  std::string topic = "product_sale";
  std::string log_level = "warn";
};

struct Context {
  Topic topic = Topic::product_sale;
  BackendKind kind = BackendKind::scripted;
  PriceBounds bounds;
  std::shared_ptr<const TemplateStore> templates;
  std::shared_ptr<RemoteChatModel> remote;

  std::unique_ptr<Arena> arena(std::uint64_t seed) const {
    if (kind == BackendKind::remote) return std::make_unique<RemoteArena>(remote, templates, topic, bounds, RemoteRoles{}, seed);
    return std::make_unique<ScriptedArena>(ScriptedWorld::standard(topic, bounds), templates, seed);
  }

  RemediationPolicy policy(std::vector<Exemplar> z, std::uint64_t seed) const {
    RemediationPolicy p;
    p.exemplars = std::move(z);
    p.model = remote;
    p.templates = templates;
    p.topic = topic;
    p.seed = seed;
    return p;
  }

  Json counts() const {
    Json j;
    const auto s = remote ? remote->stats() : BackendStats{};
    j["backend_calls"] = s.network_calls;
    j["cache_hits"] = s.cache_hits;
    return j;
  }
};

Context make_context(const Globals& g) {
  Context c;
  c.topic = parse_topic(g.topic);
  c.kind = parse_backend_kind(g.backend);
  c.bounds = default_bounds(c.topic);
  c.templates = std::make_shared<const TemplateStore>(TemplateStore::load(g.prompts_dir));
  if (c.kind == BackendKind::remote) {
    BackendSession session{BackendKind::remote, g.api_base, g.model, kNegotiatorParams, 0};
    session.validate();
    RemoteConfig rc;
    rc.api_base = g.api_base;
    rc.model = g.model;
    rc.cache_dir = g.cache_dir;
    c.remote = std::make_shared<RemoteChatModel>(rc);
  }
  return c;
}

Json snapshot(const CLI::App& app) {
  Json j = Json::object();
  auto add = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config") continue;
      if (opt->count() > 0) {
        const auto& res = opt->results();
        if (res.size() == 1) {
          j[name] = res.front();
        } else {
          j[name] = res;
        }
      } else {
        j[name] = opt->get_default_str();
      }
    }
  };
  add(app);
  for (const CLI::App* sub : app.get_subcommands()) add(*sub);
  return j;
}

std::vector<Exemplar> load_policy_exemplars(const std::string& pool_path, const std::string& set_path,
                                            std::vector<fs::path>& inputs) {
  if (pool_path.empty() && set_path.empty()) return {};
  if (pool_path.empty() || set_path.empty()) throw ValidationError("--pool and --set must be given together");
  auto pool = ExemplarPool::load(pool_path);
  auto set = load_exemplar_set(set_path);
  inputs.emplace_back(pool_path);
  inputs.emplace_back(set_path);
  return pool.resolve(set);
}

struct Query {
  std::vector<Turn> history;
  std::string violation;
};

Query load_query(const std::string& path) {
  const Json j = load_json_file(path);
  try {
    return {turns_from_json(j.at("history")), j.at("violation_text").get<std::string>()};
  } catch (const nlohmann::json::exception&) {
    throw ParseError(path + ": query needs 'history' and 'violation_text'");
  }
}

RolloutSettings probe_settings(double p_c, std::size_t max_turns) {
  RolloutSettings s;
  s.sim.p_c = p_c;
  s.sim.single_remediation_point = true;
  s.sim.max_turns = max_turns;
  return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Negotiation simulation with norm-violation remediation and ICL exemplar selection", "negotia"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML file with option values (flags override it)");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--workers", g.workers, "Parallel rollout workers")->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", g.cache_dir, "Response cache directory for the remote backend");
  app.add_option("--api-base", g.api_base, "OpenAI-compatible API base URL");
  app.add_option("--model", g.model, "Remote model name");
  app.add_option("--prompts-dir", g.prompts_dir, "Prompt template directory");
  app.add_option("--backend", g.backend, "Agent backend")->check(CLI::IsMember({"scripted", "remote"}));
  app.add_option("--topic", g.topic, "Negotiation topic")
      ->check(CLI::IsMember({"product_sale", "housing_price", "salary"}));
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Roll out negotiations into a JSONL corpus");
  std::size_t sim_n = 10, max_turns = 20;
  double p_c = 0.4;
  std::string remediate_flag = "off", sim_out, sim_pool, sim_set;
  std::uint64_t seed = 0;
  bool single_point = false, keep_failed = false;
  sim->add_option("--n", sim_n, "Number of rollouts");
  sim->add_option("--p-c", p_c, "Violation probability per seller turn")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--remediate", remediate_flag, "Remediate violations")->check(CLI::IsMember({"on", "off"}));
  sim->add_option("--seed", seed, "Base seed");
  sim->add_option("--out", sim_out, "Output corpus (JSONL)")->required();
  sim->add_option("--pool", sim_pool, "Exemplar pool for the remediation policy");
  sim->add_option("--set", sim_set, "Exemplar set for the remediation policy");
  sim->add_option("--max-turns", max_turns, "Turn cap");
  sim->add_flag("--single-point", single_point, "At most one violation per dialogue");
  sim->add_flag("--keep-failed", keep_failed, "Keep partial dialogues from failed rollouts");

  // annotate
  auto* ann = app.add_subcommand("annotate", "Zero-shot (silver) remediation of every violation turn");
  std::string ann_in, ann_out;
  ann->add_option("--in", ann_in, "Input corpus (JSONL)")->required();
  ann->add_option("--out", ann_out, "Output exemplar pool (JSONL)")->required();

  // filter
  auto* fil = app.add_subcommand("filter", "Rank individual exemplars by value impact");
  std::string fil_pool, fil_out;
  std::size_t sample = 24, probe_size = 8;
  fil->add_option("--pool", fil_pool, "Exemplar pool (JSONL)")->required();
  fil->add_option("--sample", sample, "Exemplars sampled for ranking");
  fil->add_option("--probe-size", probe_size, "Remediation points in the probe set");
  fil->add_option("--seed", seed, "Seed for probe rollouts and sampling");
  fil->add_option("--p-c", p_c, "Violation probability for probe rollouts")->check(CLI::Range(0.0, 1.0));
  fil->add_option("--out", fil_out, "Ranked output (JSON)")->required();

  // search
  auto* sea = app.add_subcommand("search", "Early-pruning traversal for the best exemplar set");
  std::string sea_ranked, sea_pool, sea_out, sea_trace;
  std::size_t k = 8, m = 2;
  std::optional<std::size_t> sea_probe;
  std::optional<std::uint64_t> sea_seed;
  sea->add_option("--ranked", sea_ranked, "Output of filter")->required();
  sea->add_option("--pool", sea_pool, "Exemplar pool (defaults to the one named in --ranked)");
  sea->add_option("--k", k, "Set size K")->check(CLI::PositiveNumber);
  sea->add_option("--m", m, "Consecutive failures before pruning")->check(CLI::PositiveNumber);
  sea->add_option("--probe-size", sea_probe, "Probe size (defaults to the ranking's)");
  sea->add_option("--seed", sea_seed, "Probe seed (defaults to the ranking's)");
  sea->add_option("--p-c", p_c, "Violation probability for probe rollouts")->check(CLI::Range(0.0, 1.0));
  sea->add_option("--out", sea_out, "Best set (JSON)")->required();
  sea->add_option("--trace", sea_trace, "Search trace (JSON)");

  // select
  auto* sel = app.add_subcommand("select", "Baseline exemplar selection");
  std::string strategy = "random", sel_pool, sel_query, sel_out, embedder_kind = "hashed",
              embedding_model = "text-embedding-3-small";
  std::size_t embed_dim = 256;
  sel->add_option("--strategy", strategy, "random or retrieval")->check(CLI::IsMember({"random", "retrieval"}));
  sel->add_option("--pool", sel_pool, "Exemplar pool (JSONL)")->required();
  sel->add_option("--k", k, "Set size K")->check(CLI::PositiveNumber);
  sel->add_option("--query", sel_query, "Query for retrieval: {history, violation_text}");
  sel->add_option("--seed", seed, "Seed for random selection");
  sel->add_option("--embedder", embedder_kind, "hashed or remote")->check(CLI::IsMember({"hashed", "remote"}));
  sel->add_option("--embed-dim", embed_dim, "Buckets of the hashed n-gram embedder")->check(CLI::PositiveNumber);
  sel->add_option("--embedding-model", embedding_model, "Remote embedding model");
  sel->add_option("--out", sel_out, "Selected set (JSON)")->required();

  // remediate
  auto* rem = app.add_subcommand("remediate", "Rewrite one violating utterance to stdout");
  std::string rem_pool, rem_set, rem_in;
  rem->add_option("--pool", rem_pool, "Exemplar pool (JSONL)");
  rem->add_option("--set", rem_set, "Exemplar set (JSON); omit both for zero-shot");
  rem->add_option("--in", rem_in, "Query: {history, violation_text}")->required();

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Corpus metrics");
  std::string eva_in, eva_report, weights = "0.7,0.1,0.1,0.1";
  eva->add_option("--in", eva_in, "Corpus (JSONL)")->required();
  eva->add_option("--weights", weights, "Reward weights a,b,g,e");
  eva->add_option("--report", eva_report, "Report (JSON); stdout when omitted");

  // interactive
  auto* itr = app.add_subcommand("interactive", "Play one side of a negotiation yourself");
  std::string role = "seller", itr_pool, itr_set, itr_out = "transcript.jsonl";
  itr->add_option("--role", role, "Side the human plays")->check(CLI::IsMember({"buyer", "seller"}));
  itr->add_option("--pool", itr_pool, "Exemplar pool for the remediation policy");
  itr->add_option("--set", itr_set, "Exemplar set for the remediation policy");
  itr->add_option("--seed", seed, "Seed for the counterpart");
  itr->add_option("--max-turns", max_turns, "Turn cap");
  itr->add_option("--out", itr_out, "Transcript (JSONL)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto logger = std::make_shared<spdlog::logger>("negotia", std::make_shared<spdlog::sinks::ostream_sink_mt>(err));
  logger->set_level(spdlog::level::from_str(g.log_level));
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);

  RunManifest man;
  man.started = std::chrono::system_clock::now();
  man.config = snapshot(app);

  try {
    const Context ctx = make_context(g);
    auto finish = [&](const std::string& command) {
      man.command = command;
      man.finished = std::chrono::system_clock::now();
      const Json counts = ctx.counts();
      for (const auto& [key, v] : counts.items()) man.counts[key] = v;
      write_manifests(man);
    };

    if (*sim) {
      man.seed = seed;
      auto z = load_policy_exemplars(sim_pool, sim_set, man.inputs);
      SimulationConfig cfg;
      cfg.p_c = p_c;
      cfg.remediation_enabled = remediate_flag == "on";
      cfg.single_remediation_point = single_point;
      cfg.max_turns = max_turns;
      cfg.seed = seed;
      const auto remediator = make_remediator(ctx.policy(std::move(z), seed));
      const auto proto = ctx.arena(seed);
      auto dialogues = simulate_many(*proto, &remediator, cfg, sim_n, g.workers,
                                     std::string(to_string(ctx.topic)) + "-" + std::to_string(seed) + "-");
      std::vector<Dialogue> kept;
      std::size_t failed = 0;
      for (auto& d : dialogues) {
        if (d.error && !keep_failed) {
          ++failed;
          continue;
        }
        kept.push_back(std::move(d));
      }
      save_dialogues(sim_out, kept);
      man.outputs.emplace_back(sim_out);
      man.counts["rollouts"] = sim_n;
      man.counts["written"] = kept.size();
      man.counts["failed"] = failed;
      finish("simulate");
      out << "wrote " << kept.size() << " dialogues to " << sim_out << '\n';
      return kExitOk;
    }

    if (*ann) {
      auto corpus = load_dialogues(ann_in);
      man.inputs.emplace_back(ann_in);
      auto result = silver_annotate(corpus, ctx.policy({}, 0));
      ExemplarPool(result.pool).save(ann_out);
      man.outputs.emplace_back(ann_out);
      man.counts["dialogues"] = corpus.size();
      man.counts["exemplars"] = result.pool.size();
      man.counts["failures"] = result.failures.size();
      finish("annotate");
      out << "wrote " << result.pool.size() << " exemplars to " << ann_out << '\n';
      return kExitOk;
    }

    if (*fil) {
      man.seed = seed;
      const auto pool = ExemplarPool::load(fil_pool);
      man.inputs.emplace_back(fil_pool);
      const auto proto = ctx.arena(seed);
      const auto settings = probe_settings(p_c, max_turns);
      auto probe = build_probe_set(*proto, ctx.policy({}, seed), settings, ProbeConfig{probe_size, seed});
      ImpactEstimator est(pool, ctx.policy({}, seed), std::move(probe), settings, g.workers);
      auto ranked = rank_individuals(est, sample, derive_seed(seed, 99));

      Json j;
      j["pool"] = fil_pool;
      j["probe_size"] = probe_size;
      j["seed"] = seed;
      j["sample_size"] = sample;
      j["p_c"] = p_c;
      j["probe_id"] = est.probe_id();
      j["ranked"] = Json::array();
      for (const auto& r : ranked) j["ranked"].push_back(Json{{"id", r.id}, {"value_impact", r.value_impact}});
      save_json_file(fil_out, j);
      man.outputs.emplace_back(fil_out);
      man.counts["ranked"] = ranked.size();
      man.counts["probe_points"] = probe_size;
      finish("filter");
      out << "ranked " << ranked.size() << " exemplars into " << fil_out << '\n';
      return kExitOk;
    }

    if (*sea) {
      const Json rj = load_json_file(sea_ranked);
      man.inputs.emplace_back(sea_ranked);
      std::vector<RankedExemplar> ranked;
      try {
        for (const auto& r : rj.at("ranked")) ranked.push_back({r.at("id").get<std::string>(), r.at("value_impact").get<double>()});
        if (sea_pool.empty()) sea_pool = rj.at("pool").get<std::string>();
        if (!sea_probe) sea_probe = rj.at("probe_size").get<std::size_t>();
        if (!sea_seed) sea_seed = rj.at("seed").get<std::uint64_t>();
        if (sea->count("--p-c") == 0 && rj.contains("p_c")) p_c = rj.at("p_c").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(sea_ranked + ": malformed ranking: " + e.what());
      }
      man.seed = *sea_seed;
      const auto pool = ExemplarPool::load(sea_pool);
      man.inputs.emplace_back(sea_pool);
      const auto split = split_candidates(ranked, k);
      const auto proto = ctx.arena(*sea_seed);
      const auto settings = probe_settings(p_c, max_turns);
      auto probe = build_probe_set(*proto, ctx.policy({}, *sea_seed), settings, ProbeConfig{*sea_probe, *sea_seed});
      ImpactEstimator est(pool, ctx.policy({}, *sea_seed), std::move(probe), settings, g.workers);
      auto [best, trace] = search_optimal_set(split.init, split.candidates, m,
                                              [&](const ExemplarSet& s) { return est.impact(s); });
      save_exemplar_set(sea_out, best);
      man.outputs.emplace_back(sea_out);
      if (!sea_trace.empty()) {
        save_json_file(sea_trace, to_json(trace));
        man.outputs.emplace_back(sea_trace);
      }
      man.counts["evaluations"] = trace.evaluations.size() + 1;
      man.counts["pruning_events"] = trace.pruning.size();
      finish("search");
      out << "best set impact " << *best.value_impact << " written to " << sea_out << '\n';
      return kExitOk;
    }

    if (*sel) {
      man.seed = seed;
      const auto pool = ExemplarPool::load(sel_pool);
      man.inputs.emplace_back(sel_pool);
      ExemplarSet set;
      if (strategy == "random") {
        set = select_random(pool, k, seed);
      } else {
        if (sel_query.empty()) throw ValidationError("--strategy retrieval needs --query");
        const auto q = load_query(sel_query);
        man.inputs.emplace_back(sel_query);
        std::unique_ptr<Embedder> emb;
        if (embedder_kind == "remote") {
          if (!ctx.remote) throw ValidationError("--embedder remote needs --backend remote");
          emb = std::make_unique<RemoteEmbedder>(ctx.remote, embedding_model);
        } else {
          emb = std::make_unique<HashedNgramEmbedder>(embed_dim);
        }
        set = select_retrieval(pool, q.history, q.violation, k, *emb);
      }
      save_exemplar_set(sel_out, set);
      man.outputs.emplace_back(sel_out);
      finish("select");
      out << "selected " << set.members.size() << " exemplars into " << sel_out << '\n';
      return kExitOk;
    }

    if (*rem) {
      std::vector<fs::path> inputs;
      auto z = load_policy_exemplars(rem_pool, rem_set, inputs);
      const auto q = load_query(rem_in);
      out << remediate(ctx.policy(std::move(z), 0), q.history, q.violation) << '\n';
      return kExitOk;
    }

    if (*eva) {
      const auto w = parse_weights(weights);
      const auto corpus = load_dialogues(eva_in);
      man.inputs.emplace_back(eva_in);
      const auto report = evaluate_corpus(corpus, w);
      Json j;
      j["n"] = report.n;
      j["success_rate"] = report.success_rate;
      j["mean_deal_value"] = report.mean_deal_value ? Json(*report.mean_deal_value) : Json(nullptr);
      j["trust_improvement_rate"] = report.trust_improvement_rate;
      j["relation_enhancement_rate"] = report.relation_enhancement_rate;
      j["mean_reward"] = report.mean_reward;
      j["weights"] = {w.alpha, w.beta, w.gamma, w.epsilon};
      if (eva_report.empty()) {
        out << j.dump(2) << '\n';
      } else {
        save_json_file(eva_report, j);
        man.outputs.emplace_back(eva_report);
        man.counts["dialogues"] = report.n;
        finish("evaluate");
      }
      return kExitOk;
    }

    if (*itr) {
      man.seed = seed;
      auto z = load_policy_exemplars(itr_pool, itr_set, man.inputs);
      const auto remediator = make_remediator(ctx.policy(std::move(z), seed));
      auto arena = ctx.arena(seed);
      arena->reseed(derive_seed(seed, 1));
      auto result = interactive_session(parse_speaker(role), *arena, remediator, max_turns,
                                        "interactive-" + std::to_string(seed), in, out);
      save_dialogues(itr_out, std::span<const Dialogue>(&result.transcript, 1));
      man.outputs.emplace_back(itr_out);
      man.counts["turns"] = result.transcript.turns.size();
      man.counts["flags"] = result.flags;
      man.counts["remediation_accepted"] = result.accepted;
      finish("interactive");
      out << "transcript saved to " << itr_out << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("negotia");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), in, out, err);
}

}  // namespace negotia
