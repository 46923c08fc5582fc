#include <doctest.h>

#include "pandora/generator.hpp"
#include "pandora/json_io.hpp"
#include "pandora/oracle.hpp"
#include "test_util.hpp"

using namespace pandora;
using namespace pandora::testutil;

TEST_CASE("single coin box is worth 3") {
  Instance inst = make_coin_box();
  CHECK(near(oracle::brute_force_optimal(inst), 3.0));
  // Forced order: the best fixed order matches, and the best fixed set too.
  CHECK(near(oracle::best_pa_value(inst).value, 3.0));
  CHECK(near(oracle::best_na_value(inst).value, 3.0));
}

TEST_CASE("abc fixture: hand-computed values and the adaptivity gap") {
  Instance abc = make_abc_instance();
  double fa = oracle::brute_force_optimal(abc);
  oracle::PaResult pa = oracle::best_pa_value(abc);
  oracle::NaResult na = oracle::best_na_value(abc);

  CHECK(near(fa, kAbcFaValue));
  CHECK(near(pa.value, kAbcPaBest));
  CHECK(near(na.value, kAbcNaBest));
  CHECK(fa > pa.value + 1e-6);  // fixed orders are strictly suboptimal here
  CHECK(pa.value > na.value + 1e-6);
  CHECK(na.chosen.size() == 3);  // best fixed set opens everything
}

TEST_CASE("abc fixture: fixed order A,C,B beats fixed order A,B,C") {
  // Evaluate both orders by restricting the enumeration: build the values
  // through best_pa_value on sub-problems is awkward, so recompute the two
  // order values directly with the public enumerator by checking its
  // winner and the hand-derived numbers.
  Instance abc = make_abc_instance();
  oracle::PaResult pa = oracle::best_pa_value(abc);
  CHECK(near(pa.value, kAbcPaBest));
  // The winner opens C second (indices: A=0, B=1, C=2) or starts with C;
  // both hand-checked optima share value 93.825 and open B last.
  REQUIRE(pa.order.size() == 3);
  CHECK(pa.order.back() == 1);
}

TEST_CASE("strategy classes nest on random instances") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    Instance inst = generate_instance(Shape::kMultiline, 6, 3, seed, false);
    double fa = oracle::brute_force_optimal(inst);
    double pa = oracle::best_pa_value(inst).value;
    double na = oracle::best_na_value(inst).value;
    CHECK(na <= pa + 1e-9);
    CHECK(pa <= fa + 1e-9);
    CHECK(fa >= 0.0);
  }
}

TEST_CASE("single line: fixed order equals fully adaptive") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Instance inst = generate_instance(Shape::kLine, 5, 3, seed, false);
    CHECK(near(oracle::best_pa_value(inst).value, oracle::brute_force_optimal(inst)));
  }
}

TEST_CASE("independent boxes: fixed order equals fully adaptive") {
  // Four disjoint single-box components: the classic index-policy regime.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Instance base = generate_instance(Shape::kForest, 4, 3, seed, false);
    nlohmann::json doc = instance_to_json(base);
    doc["edges"] = nlohmann::json::array();
    for (auto& jb : doc["boxes"]) {
      if (jb["root_dist"].is_null()) {
        jb["root_dist"] = std::vector<double>{0.3, 0.4, 0.3};
      }
    }
    Instance inst = instance_from_json(doc);
    CHECK(near(oracle::best_pa_value(inst).value, oracle::brute_force_optimal(inst)));
  }
}

TEST_CASE("free boxes are all opened; hopeless boxes are skipped") {
  Instance inst = generate_instance(Shape::kForest, 6, 3, 3, false);
  nlohmann::json doc = instance_to_json(inst);
  for (auto& jb : doc["boxes"]) jb["cost"] = 0.0;
  oracle::NaResult free_sets = oracle::best_na_value(instance_from_json(doc));
  CHECK(free_sets.chosen.size() == 6);

  double vmax = inst.grid.max_value();
  for (auto& jb : doc["boxes"]) jb["cost"] = vmax * 7;
  oracle::NaResult hopeless = oracle::best_na_value(instance_from_json(doc));
  CHECK(hopeless.chosen.empty());
  CHECK(hopeless.value == 0.0);
}

TEST_CASE("oracle caps") {
  Instance big = generate_instance(Shape::kForest, 13, 3, 1, false);
  CHECK_THROWS_AS(oracle::brute_force_optimal(big), PandoraError);
  Instance wide = generate_instance(Shape::kLine, 2, 16, 1, false);
  CHECK_THROWS_AS(oracle::brute_force_optimal(wide), PandoraError);
  Instance big_pa = generate_instance(Shape::kForest, 11, 3, 1, false);
  CHECK_THROWS_AS(oracle::best_pa_value(big_pa), PandoraError);
}

namespace {

// Memo-free reference recursion over information sets.
double fa_reference(const Instance& inst, std::vector<int>& values, double x) {
  double best = x;
  for (int b = 0; b < inst.box_count(); ++b) {
    if (values[b] >= 0) continue;
    int p = inst.parent[b];
    if (p >= 0 && values[p] < 0) continue;
    const std::vector<double>& dist = inst.cond_dist(b, p >= 0 ? values[p] : kStartCond);
    double cont = -inst.boxes[b].cost;
    for (int y = 0; y < inst.value_count(); ++y) {
      if (dist[y] == 0.0) continue;
      values[b] = y;
      cont += dist[y] * fa_reference(inst, values, std::max(x, inst.grid.values[y]));
      values[b] = -1;
    }
    best = std::max(best, cont);
  }
  return best;
}

}  // namespace

TEST_CASE("memoized and memo-free brute force agree") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Instance inst = generate_instance(Shape::kForest, 6, 3, seed, false);
    std::vector<int> values(inst.box_count(), -1);
    double a = oracle::brute_force_optimal(inst);
    double b = fa_reference(inst, values, 0.0);
    CHECK(near(a, b, 1e-9));
  }
}
