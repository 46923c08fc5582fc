#include <doctest.h>

#include <algorithm>

#include "pandora/generator.hpp"
#include "pandora/json_io.hpp"
#include "pandora/model.hpp"
#include "test_util.hpp"

using namespace pandora;
using namespace pandora::testutil;

namespace {

nlohmann::json minimal_doc() {
  return {{"values", {0.0, 10.0}},
          {"boxes", {{{"id", "b0"}, {"cost", 2.0}, {"root_dist", {0.5, 0.5}}}}},
          {"edges", nlohmann::json::array()},
          {"transitions", nlohmann::json::object()}};
}

bool has_code(const ValidationError& e, const std::string& code) {
  return std::any_of(e.violations().begin(), e.violations().end(),
                     [&](const Violation& v) { return v.code == code; });
}

}  // namespace

TEST_CASE("minimal single-box instance validates") {
  Instance inst = instance_from_json(minimal_doc());
  CHECK(inst.box_count() == 1);
  CHECK(inst.is_root(0));
  CHECK(inst.static_transition);  // vacuously: no edges
}

TEST_CASE("two parents for one box is rejected") {
  nlohmann::json doc = minimal_doc();
  doc["boxes"].push_back({{"id", "b1"}, {"cost", 1.0}, {"root_dist", {1.0, 0.0}}});
  doc["boxes"].push_back({{"id", "b2"}, {"cost", 1.0}, {"root_dist", nullptr}});
  doc["transitions"]["t"] = {{0.5, 0.5}, {0.5, 0.5}};
  doc["edges"] = {{{"from", "b0"}, {"to", "b2"}, {"transition", "t"}},
                  {{"from", "b1"}, {"to", "b2"}, {"transition", "t"}}};
  try {
    instance_from_json(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_code(e, "NotAForest"));
  }
}

TEST_CASE("cycle is rejected") {
  nlohmann::json doc = minimal_doc();
  doc["boxes"] = {{{"id", "b0"}, {"cost", 1.0}, {"root_dist", nullptr}},
                  {{"id", "b1"}, {"cost", 1.0}, {"root_dist", nullptr}}};
  doc["transitions"]["t"] = {{0.5, 0.5}, {0.5, 0.5}};
  doc["edges"] = {{{"from", "b0"}, {"to", "b1"}, {"transition", "t"}},
                  {{"from", "b1"}, {"to", "b0"}, {"transition", "t"}}};
  try {
    instance_from_json(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_code(e, "NotAForest"));
  }
}

TEST_CASE("transition row not summing to one is rejected") {
  nlohmann::json doc = minimal_doc();
  doc["transitions"]["t"] = {{0.5, 0.6}, {0.5, 0.5}};
  try {
    instance_from_json(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_code(e, "BadDistribution"));
  }
}

TEST_CASE("missing root distribution is rejected") {
  nlohmann::json doc = minimal_doc();
  doc["boxes"][0]["root_dist"] = nullptr;
  try {
    instance_from_json(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_code(e, "MissingRootDist"));
  }
}

TEST_CASE("unsorted grid is rejected") {
  nlohmann::json doc = minimal_doc();
  doc["values"] = {10.0, 0.0};
  try {
    instance_from_json(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_code(e, "UnsortedGrid"));
  }
}

namespace {

Instance two_box_chain(const std::vector<double>& root,
                       const std::vector<std::vector<double>>& rows) {
  nlohmann::json doc = {{"values", {0.0, 10.0}},
                        {"boxes",
                         {{{"id", "b0"}, {"cost", 1.0}, {"root_dist", root}},
                          {{"id", "b1"}, {"cost", 1.0}, {"root_dist", nullptr}}}},
                        {"edges", {{{"from", "b0"}, {"to", "b1"}, {"transition", "t"}}}},
                        {"transitions", {{"t", rows}}}};
  return instance_from_json(doc);
}

}  // namespace

TEST_CASE("marginals: deterministic transition flips the point mass") {
  Instance inst = two_box_chain({1.0, 0.0}, {{0.0, 1.0}, {1.0, 0.0}});
  auto marg = propagate_marginals(inst);
  CHECK(marg[1].probs[0] == 0.0);
  CHECK(marg[1].probs[1] == 1.0);
}

TEST_CASE("marginals: doubly stochastic transition keeps the uniform") {
  Instance inst = two_box_chain({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}});
  auto marg = propagate_marginals(inst);
  CHECK(near(marg[1].probs[0], 0.5, 1e-15));
  CHECK(near(marg[1].probs[1], 0.5, 1e-15));
}

TEST_CASE("marginals: two steps of a 2x2 chain, worked by hand") {
  // (1,0) -> (.9,.1) -> (.83,.17)
  nlohmann::json doc = {{"values", {0.0, 10.0}},
                        {"boxes",
                         {{{"id", "b0"}, {"cost", 1.0}, {"root_dist", {1.0, 0.0}}},
                          {{"id", "b1"}, {"cost", 1.0}, {"root_dist", nullptr}},
                          {{"id", "b2"}, {"cost", 1.0}, {"root_dist", nullptr}}}},
                        {"edges",
                         {{{"from", "b0"}, {"to", "b1"}, {"transition", "t"}},
                          {{"from", "b1"}, {"to", "b2"}, {"transition", "t"}}}},
                        {"transitions", {{"t", {{0.9, 0.1}, {0.2, 0.8}}}}}};
  Instance inst = instance_from_json(doc);
  auto marg = propagate_marginals(inst);
  CHECK(near(marg[2].probs[0], 0.83, 1e-12));
  CHECK(near(marg[2].probs[1], 0.17, 1e-12));
}

TEST_CASE("marginals sum to one and are order-independent on random forests") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Instance inst = generate_instance(Shape::kForest, 9, 4, seed, false);
    auto marg = propagate_marginals(inst);
    for (int b = 0; b < inst.box_count(); ++b) {
      double sum = 0.0;
      for (double p : marg[b].probs) sum += p;
      CHECK(near(sum, 1.0, kPropagatedTol));
    }
    // Another valid topological order: roots and children visited in
    // reverse index order via a stack.
    std::vector<int> order;
    std::vector<int> stack;
    for (int b = inst.box_count() - 1; b >= 0; --b) {
      if (inst.is_root(b)) stack.push_back(b);
    }
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      order.push_back(b);
      for (int c : inst.children[b]) stack.push_back(c);
    }
    auto marg2 = propagate_marginals(inst, order);
    for (int b = 0; b < inst.box_count(); ++b) {
      for (int j = 0; j < inst.value_count(); ++j) {
        CHECK(marg[b].probs[j] == marg2[b].probs[j]);  // identical, not just close
      }
    }
  }
}

TEST_CASE("abc fixture validates and is a union of lines") {
  Instance abc = make_abc_instance();
  CHECK(abc.box_count() == 3);
  CHECK(is_union_of_lines(abc));
}

TEST_CASE("instance json round trip") {
  Instance inst = generate_instance(Shape::kForest, 8, 3, 5, true);
  nlohmann::json doc = instance_to_json(inst);
  Instance back = instance_from_json(doc);
  CHECK(back.box_count() == inst.box_count());
  CHECK(back.edges.size() == inst.edges.size());
  CHECK(back.static_transition == inst.static_transition);
  CHECK(instance_to_json(back) == doc);
}

TEST_CASE("xgrid is zero union values, sorted") {
  ValueGrid g{{-3.0, 5.0}};
  CHECK(make_xgrid(g) == std::vector<double>{-3.0, 0.0, 5.0});
  ValueGrid g2{{0.0, 5.0}};
  CHECK(make_xgrid(g2) == std::vector<double>{0.0, 5.0});
}
