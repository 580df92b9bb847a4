#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ddop/tensor.hpp"

using namespace ddop;

namespace {

SpacePtr noun4() { return make_space("N", {"A", "M", "Z", "P"}); }

Tensor basis_ket(const SpacePtr& s, std::size_t i) {
  Tensor t = Tensor::zeros({Wire{s, false}});
  t.data[i] = 1.0;
  return t;
}

Tensor random_tensor(std::vector<Wire> wires, std::mt19937_64& rng) {
  Tensor t = Tensor::zeros(std::move(wires));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& x : t.data) x = u(rng);
  return t;
}

}  // namespace

TEST_CASE("spaces validate their basis") {
  auto n = noun4();
  REQUIRE(n->dim == 4);
  REQUIRE(basis_index(*n, "Z").value() == 2);
  REQUIRE_FALSE(basis_index(*n, "Q").has_value());
  REQUIRE_THROWS_AS(make_space("X", {"a", "a"}), ShapeMismatch);
  REQUIRE_THROWS_AS(make_space("X", {}), ShapeMismatch);
  REQUIRE_THROWS_AS(make_space("X", std::vector<std::string>(65, "l")), ShapeMismatch);
}

TEST_CASE("tensor construction checks shape and finiteness") {
  auto n = noun4();
  REQUIRE_THROWS_AS(Tensor::build({Wire{n, false}}, {1.0, 2.0}), ShapeMismatch);
  REQUIRE_THROWS_AS(Tensor::build({Wire{n, false}}, {1.0, 2.0, std::nan(""), 0.0}),
                    ShapeMismatch);
  Tensor s = Tensor::scalar(2.5);
  REQUIRE(scalar_value(s) == 2.5);
  REQUIRE_THROWS_AS(scalar_value(cup(n)), ShapeMismatch);
}

TEST_CASE("scalars multiply under tensor product") {
  Tensor p = tensor_product(Tensor::scalar(2.0), Tensor::scalar(3.0));
  REQUIRE(scalar_value(p) == 6.0);
}

TEST_CASE("cup trace equals the dimension") {
  auto n = noun4();
  Tensor t = contract(cup(n), 0, 1);
  REQUIRE(scalar_value(t) == 4.0);
}

TEST_CASE("inner products via conjugate states") {
  auto n = noun4();
  Tensor a = basis_ket(n, 0), m = basis_ket(n, 1);
  REQUIRE(scalar_value(contract(tensor_product(a, conjugate(a)), 0, 1)) == 1.0);
  REQUIRE(scalar_value(contract(tensor_product(a, conjugate(m)), 0, 1)) == 0.0);
}

TEST_CASE("circle: cup closed by cap gives the dimension") {
  auto n = noun4();
  Tensor t = tensor_product(cup(n), cap(n));
  // cup legs (plain, conj); cap legs (conj, plain): close both loops.
  t = contract(t, 0, 2);
  t = contract(t, 0, 1);
  REQUIRE(scalar_value(t) == 4.0);
}

TEST_CASE("snake equations yank a state through cups and caps") {
  std::mt19937_64 rng(7);
  for (std::size_t d = 1; d <= 8; ++d) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < d; ++i) labels.push_back("b" + std::to_string(i));
    auto s = make_space("H", labels);
    Tensor v = random_tensor({Wire{s, false}}, rng);

    SECTION("bend right at dim " + std::to_string(d)) {
      Tensor t = tensor_product(tensor_product(v, cup(s)), cap(s));
      // wires: v0 | cup1 cup2 | cap3 cap4 ; pair (v0,cap3) and (cup2,cap4).
      Tensor r = contract(t, 0, 3);
      r = contract(r, 1, 2);
      REQUIRE(equal_within(r, v, 0.0));
    }
    SECTION("bend left at dim " + std::to_string(d)) {
      Tensor t = tensor_product(tensor_product(v, cup(s)), cap(s));
      // pair (v0,cup2) and (cup1,cap3): survivor is cap's plain leg.
      Tensor r = contract(t, 0, 2);
      r = contract(r, 0, 1);
      REQUIRE(equal_within(r, v, 0.0));
    }
  }
}

TEST_CASE("spiders are generalized Kronecker deltas") {
  auto n = noun4();
  Tensor s03 = spider(0, 3, n);
  std::size_t nonzero = 0;
  for (double x : s03.data) nonzero += (x != 0.0);
  REQUIRE(nonzero == 4);
  REQUIRE(s03.data[0 * 16 + 0 * 4 + 0] == 1.0);
  REQUIRE(s03.data[3 * 16 + 3 * 4 + 3] == 1.0);

  Tensor unit = spider(0, 1, n);
  for (double x : unit.data) REQUIRE(x == 1.0);

  REQUIRE_THROWS_AS(spider(0, 0, n), ShapeMismatch);
}

TEST_CASE("spider fusion is exact") {
  auto n = noun4();
  // Feed one output of a 2-output spider into a 1-input/2-output spider:
  // the composite is the 3-output spider.
  Tensor t = tensor_product(spider(0, 2, n), spider(1, 2, n));
  Tensor r = contract(t, 1, 2);
  REQUIRE(equal_within(r, spider(0, 3, n), 0.0));
}

TEST_CASE("conjugate is an involution that reverses wires") {
  std::mt19937_64 rng(11);
  auto n = noun4();
  auto s = make_space("S", {"bot", "top"});
  Tensor t = random_tensor({Wire{n, false}, Wire{s, true}, Wire{n, true}}, rng);
  Tensor c = conjugate(t);
  REQUIRE(c.rank() == 3);
  REQUIRE(c.wires[0].space->name == "N");
  REQUIRE(c.wires[0].conj == false);
  REQUIRE(c.wires[1].space->name == "S");
  REQUIRE(c.wires[1].conj == false);
  REQUIRE(c.wires[2].space->name == "N");
  REQUIRE(c.wires[2].conj == true);
  // Entry check: c[i,j,k] = t[k,j,i].
  REQUIRE(c.data[(2 * 2 + 1) * 4 + 3] == t.data[(3 * 2 + 1) * 4 + 2]);
  REQUIRE(equal_within(conjugate(c), t, 0.0));
}

TEST_CASE("permute composes with its inverse") {
  std::mt19937_64 rng(13);
  auto n = noun4();
  auto s = make_space("S", {"bot", "top"});
  Tensor t = random_tensor({Wire{n, false}, Wire{s, false}, Wire{n, true}}, rng);
  std::vector<std::size_t> p{2, 0, 1}, inv{1, 2, 0};
  Tensor q = permute(t, p);
  REQUIRE(q.wires[0].conj == true);
  REQUIRE(q.dim(1) == 4);
  // q[i,j,k] = t[j,k,i].
  REQUIRE(q.data[(1 * 4 + 2) * 2 + 1] == t.data[(2 * 2 + 1) * 4 + 1]);
  REQUIRE(equal_within(permute(q, inv), t, 0.0));
  REQUIRE_THROWS_AS(permute(t, {0, 1}), ShapeMismatch);
  REQUIRE_THROWS_AS(permute(t, {0, 0, 1}), ShapeMismatch);
}

TEST_CASE("contraction rejects mismatched wires") {
  auto n = noun4();
  auto s = make_space("S", {"bot", "top"});
  Tensor t = tensor_product(cup(n), cup(s));
  REQUIRE_THROWS_AS(contract(t, 0, 2), SpaceMismatch);   // N vs S
  Tensor u = tensor_product(cup(n), cup(n));
  REQUIRE_THROWS_AS(contract(u, 0, 2), FlagMismatch);    // plain vs plain
  REQUIRE_THROWS_AS(contract(u, 0, 0), ShapeMismatch);
  REQUIRE_THROWS_AS(contract(u, 0, 9), ShapeMismatch);
}

TEST_CASE("contraction order does not matter") {
  std::mt19937_64 rng(17);
  auto n = noun4();
  Tensor a = random_tensor({Wire{n, false}, Wire{n, true}}, rng);
  Tensor b = random_tensor({Wire{n, false}, Wire{n, true}}, rng);
  Tensor c = random_tensor({Wire{n, false}, Wire{n, true}}, rng);
  Tensor t = tensor_product(tensor_product(a, b), c);
  // Chain a-b-c: contract (a right leg, b left leg) and (b right leg, c left leg).
  Tensor left_first = contract(contract(t, 1, 2), 1, 2);
  Tensor right_first = contract(contract(t, 3, 4), 1, 2);
  REQUIRE(equal_within(left_first, right_first, 1e-12));
}

TEST_CASE("proportionality detection") {
  auto n = noun4();
  Tensor two_cup = cup(n);
  for (auto& x : two_cup.data) x *= 2.0;
  auto lam = proportional_to(two_cup, cup(n), 1e-9);
  REQUIRE(lam.has_value());
  REQUIRE(lam.value() == Catch::Approx(2.0).margin(1e-12));

  Tensor a = basis_ket(n, 0), m = basis_ket(n, 1);
  REQUIRE_FALSE(proportional_to(a, m, 1e-9).has_value());

  Tensor neg = cup(n);
  for (auto& x : neg.data) x *= -3.0;
  REQUIRE_FALSE(proportional_to(neg, cup(n), 1e-9).has_value());  // positive scale only

  Tensor z = Tensor::zeros({Wire{n, false}});
  REQUIRE_THROWS_AS(proportional_to(a, z, 1e-9), ShapeMismatch);
}

TEST_CASE("equal_within rejects incompatible wire lists") {
  auto n = noun4();
  auto s = make_space("S", {"bot", "top"});
  REQUIRE_THROWS_AS(equal_within(cup(n), cup(s), 1e-9), ShapeMismatch);
  REQUIRE_THROWS_AS(equal_within(cup(n), cap(n), 1e-9), ShapeMismatch);
  REQUIRE_THROWS_AS(equal_within(cup(n), spider(0, 3, n), 1e-9), ShapeMismatch);
}

TEST_CASE("network contraction agrees with brute-force summation") {
  std::mt19937_64 rng(23);
  auto n = make_space("N", {"x", "y", "z"});
  auto s = make_space("S", {"bot", "top"});

  SECTION("three-factor chain with a free wire") {
    Tensor a = random_tensor({Wire{n, false}, Wire{n, true}}, rng);
    Tensor b = random_tensor({Wire{n, false}, Wire{s, false}, Wire{n, true}}, rng);
    Tensor c = random_tensor({Wire{n, false}}, rng);
    std::vector<Tensor> fs{a, b, c};
    std::vector<NetworkPair> ps{{0, 1, 1, 0}, {1, 2, 2, 0}};
    Tensor fast = contract_network(fs, ps);
    Tensor slow = contract_network_bruteforce(fs, ps);
    REQUIRE(fast.rank() == 2);  // a's plain leg, b's sentence leg
    REQUIRE(equal_within(fast, slow, 1e-12));
  }

  SECTION("closed loop gives a scalar") {
    Tensor a = random_tensor({Wire{n, false}, Wire{n, true}}, rng);
    Tensor b = random_tensor({Wire{n, false}, Wire{n, true}}, rng);
    std::vector<Tensor> fs{a, b};
    std::vector<NetworkPair> ps{{0, 1, 1, 0}, {0, 0, 1, 1}};
    Tensor fast = contract_network(fs, ps);
    Tensor slow = contract_network_bruteforce(fs, ps);
    REQUIRE(fast.rank() == 0);
    REQUIRE(std::abs(scalar_value(fast) - scalar_value(slow)) < 1e-12);
  }

  SECTION("self-pair traces a single factor") {
    Tensor a = random_tensor({Wire{n, false}, Wire{s, false}, Wire{n, true}}, rng);
    std::vector<Tensor> fs{a};
    std::vector<NetworkPair> ps{{0, 0, 0, 2}};
    Tensor fast = contract_network(fs, ps);
    Tensor slow = contract_network_bruteforce(fs, ps);
    REQUIRE(fast.rank() == 1);
    REQUIRE(equal_within(fast, slow, 1e-12));
  }

  SECTION("random networks, all wires free or paired at random") {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Tensor> fs;
      const std::size_t nf = 2 + trial % 3;
      for (std::size_t f = 0; f < nf; ++f) {
        std::vector<Wire> ws;
        const std::size_t r = 1 + rng() % 3;
        for (std::size_t w = 0; w < r; ++w) ws.push_back(Wire{n, (rng() & 1) != 0});
        fs.push_back(random_tensor(std::move(ws), rng));
      }
      // Pair up opposite-flag legs greedily at random.
      std::vector<std::pair<std::size_t, std::size_t>> plain, conj;
      for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t w = 0; w < fs[f].rank(); ++w)
          (fs[f].wires[w].conj ? conj : plain).emplace_back(f, w);
      std::shuffle(plain.begin(), plain.end(), rng);
      std::shuffle(conj.begin(), conj.end(), rng);
      std::vector<NetworkPair> ps;
      const std::size_t npair = std::min(plain.size(), conj.size());
      for (std::size_t k = 0; k < npair; ++k) {
        if ((rng() & 1) != 0) continue;  // leave some legs free
        ps.push_back({plain[k].first, plain[k].second, conj[k].first, conj[k].second});
      }
      Tensor fast = contract_network(fs, ps);
      Tensor slow = contract_network_bruteforce(fs, ps);
      REQUIRE(equal_within(fast, slow, 1e-10));
    }
  }

  SECTION("invalid networks are rejected") {
    Tensor a = random_tensor({Wire{n, false}, Wire{n, true}}, rng);
    Tensor b = random_tensor({Wire{n, false}, Wire{s, true}}, rng);
    REQUIRE_THROWS_AS(
        contract_network({a, b}, {{0, 0, 1, 1}}), SpaceMismatch);
    REQUIRE_THROWS_AS(
        contract_network({a, b}, {{0, 0, 1, 0}}), FlagMismatch);
    REQUIRE_THROWS_AS(
        contract_network({a, b}, {{0, 0, 0, 1}, {0, 1, 1, 0}}), ShapeMismatch);
    REQUIRE_THROWS_AS(
        contract_network({a}, {{0, 0, 0, 5}}), ShapeMismatch);
  }
}

TEST_CASE("network free-wire order is canonical by factor then wire") {
  std::mt19937_64 rng(29);
  auto n = make_space("N", {"x", "y"});
  auto s = make_space("S", {"bot", "top"});
  Tensor a = random_tensor({Wire{s, false}, Wire{n, false}}, rng);
  Tensor b = random_tensor({Wire{n, true}, Wire{s, true}}, rng);
  std::vector<NetworkPair> ps{{0, 1, 1, 0}};
  Tensor r = contract_network({a, b}, ps);
  REQUIRE(r.rank() == 2);
  REQUIRE(r.wires[0].conj == false);  // a's surviving leg first
  REQUIRE(r.wires[1].conj == true);   // then b's
  // Match a hand-rolled pairwise evaluation.
  Tensor manual = contract(tensor_product(a, b), 1, 2);
  REQUIRE(equal_within(r, manual, 1e-12));
}
