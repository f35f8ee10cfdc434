#pragma once

// Fixtures shared by the unit tests and the acceptance runner.

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "negotia/arena.hpp"
#include "negotia/core.hpp"
#include "negotia/prompts.hpp"
#include "negotia/remediate.hpp"
#include "negotia/scripted.hpp"
#include "negotia/valueimpact.hpp"

namespace negotia::testing {

inline std::shared_ptr<const TemplateStore> templates() {
  static const auto store = std::make_shared<const TemplateStore>(TemplateStore::load(default_prompts_dir()));
  return store;
}

inline PriceBounds product_bounds() { return default_bounds(Topic::product_sale); }

inline ScriptedWorld product_world() { return ScriptedWorld::standard(Topic::product_sale, product_bounds()); }

inline ScriptedArena product_arena(std::uint64_t seed = 0) { return ScriptedArena(product_world(), templates(), seed); }

inline Turn buyer(std::string text) { return {Speaker::buyer, std::move(text), false, std::nullopt}; }
inline Turn seller(std::string text, bool violation = false) {
  return {Speaker::seller, std::move(text), violation, std::nullopt};
}

inline Exemplar make_exemplar(std::string id, std::optional<double> quality = std::nullopt) {
  Exemplar e;
  e.id = std::move(id);
  e.history = {buyer("Hello, does your esteemed company have a special industrial product?"),
               seller("Yes. The unit price for this industrial product is $50."), buyer("Would you consider $30 per unit?")};
  e.violation_text = "That offer is insulting. $46 per unit, take it or leave it.";
  e.remediation_text = "I see where you are coming from. Could we meet at $46 per unit?";
  e.latent_quality = quality;
  return e;
}

// The six-exemplar latent-quality fixture. Ids deliberately do not sort in
// quality order, so an id tie-break cannot fake the ranking.
struct QualityFixture {
  std::string id;
  double quality;
};
inline const std::vector<QualityFixture>& quality_fixture() {
  static const std::vector<QualityFixture> f = {
      {"ex-d", 0.9}, {"ex-a", 0.8}, {"ex-f", 0.7}, {"ex-b", 0.3}, {"ex-e", 0.2}, {"ex-c", 0.1},
  };
  return f;
}

inline ExemplarPool quality_pool() {
  std::vector<Exemplar> items;
  for (const auto& f : quality_fixture()) items.push_back(make_exemplar(f.id, f.quality));
  return ExemplarPool(std::move(items));
}

inline RemediationPolicy scripted_policy(std::uint64_t seed = 0) {
  RemediationPolicy p;
  p.templates = templates();
  p.topic = Topic::product_sale;
  p.seed = seed;
  return p;
}

// Probe rollouts use a single remediation point.
inline RolloutSettings probe_settings(double p_c = 0.4) {
  RolloutSettings s;
  s.sim.p_c = p_c;
  s.sim.single_remediation_point = true;
  return s;
}

inline std::vector<RemediationPoint> probe(std::size_t n, std::uint64_t seed, double p_c = 0.4) {
  auto arena = product_arena();
  return build_probe_set(arena, scripted_policy(), probe_settings(p_c), ProbeConfig{n, seed});
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("negotia-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace negotia::testing
