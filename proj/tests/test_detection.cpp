#include <doctest.h>

#include <hdqkd/detection.hpp>
#include <hdqkd/rng.hpp>

#include <cmath>
#include <numbers>

using namespace hdqkd;

namespace {

constexpr double kDelta = std::numbers::pi / 2;

StateXd mode(MubBasis mub, int bits, int l) { return codebook_state({mub, static_cast<std::uint8_t>(bits)}, l); }

}  // namespace

TEST_CASE("analyser ports come in canonical order") {
  const auto vec = analyser_ports(MubBasis::vector);
  CHECK(vec[0] == DetectorPort{MubBasis::vector, Path::c, 1});
  CHECK(vec[1] == DetectorPort{MubBasis::vector, Path::c, -1});
  CHECK(vec[2] == DetectorPort{MubBasis::vector, Path::d, 1});
  CHECK(vec[3] == DetectorPort{MubBasis::vector, Path::d, -1});

  const auto sc = analyser_ports(MubBasis::scalar);
  CHECK(sc[0] == DetectorPort{MubBasis::scalar, Path::a, 1});
  CHECK(sc[3] == DetectorPort{MubBasis::scalar, Path::b, -1});

  for (int i = 0; i < 4; ++i) {
    CHECK(canonical_port_index(vec[static_cast<std::size_t>(i)]) == i);
    CHECK(canonical_port_index(sc[static_cast<std::size_t>(i)]) == i);
  }
}

TEST_CASE("the default port map wires ports to the published symbols") {
  const PortMap map;
  CHECK(map.bits_for({MubBasis::vector, Path::c, 1}) == 1);
  CHECK(map.bits_for({MubBasis::vector, Path::c, -1}) == 3);
  CHECK(map.bits_for({MubBasis::vector, Path::d, 1}) == 2);
  CHECK(map.bits_for({MubBasis::vector, Path::d, -1}) == 0);
  CHECK(map.bits_for({MubBasis::scalar, Path::a, 1}) == 3);
  CHECK(map.bits_for({MubBasis::scalar, Path::a, -1}) == 2);
  CHECK(map.bits_for({MubBasis::scalar, Path::b, 1}) == 1);
  CHECK(map.bits_for({MubBasis::scalar, Path::b, -1}) == 0);

  for (std::uint8_t bits = 0; bits < 4; ++bits) {
    CHECK(map.bits_for(map.port_for(MubBasis::vector, bits)) == bits);
    CHECK(map.bits_for(map.port_for(MubBasis::scalar, bits)) == bits);
  }
}

TEST_CASE("port maps reject incomplete or ambiguous wirings") {
  std::vector<PortMap::Entry> entries;
  for (const MubBasis mub : {MubBasis::vector, MubBasis::scalar}) {
    for (const auto& port : analyser_ports(mub)) {
      entries.push_back({port, static_cast<std::uint8_t>(canonical_port_index(port))});
    }
  }
  CHECK_NOTHROW(PortMap{entries});

  auto duplicated_bits = entries;
  duplicated_bits[1].bits = duplicated_bits[0].bits;
  CHECK_THROWS_AS(PortMap{duplicated_bits}, std::invalid_argument);

  auto duplicated_port = entries;
  duplicated_port[1].port = duplicated_port[0].port;
  CHECK_THROWS_AS(PortMap{duplicated_port}, std::invalid_argument);

  auto short_list = entries;
  short_list.pop_back();
  CHECK_THROWS_AS(PortMap{short_list}, std::invalid_argument);

  auto bad_bits = entries;
  bad_bits[0].bits = 4;
  CHECK_THROWS_AS(PortMap{bad_bits}, std::invalid_argument);
}

TEST_CASE("the vector analyser resolves every vector mode on its own port") {
  const int l = 10;
  // Expected ports in canonical order (c,+), (c,-), (d,+), (d,-).
  const int expected_port[4] = {3, 0, 2, 1};  // v00->(d,-l), v01->(c,+l), v10->(d,+l), v11->(c,-l)
  for (int bits = 0; bits < 4; ++bits) {
    const auto probs = vector_port_distribution(mode(MubBasis::vector, bits, l), kDelta);
    for (int p = 0; p < 4; ++p) {
      CHECK(probs[static_cast<std::size_t>(p)] ==
            doctest::Approx(p == expected_port[bits] ? 1.0 : 0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("the scalar analyser resolves every scalar mode on its own port") {
  const int l = 10;
  // s00 = D on -l -> (b,-l); s01 -> (b,+l); s10 = A on -l -> (a,-l); s11 -> (a,+l).
  const int expected_port[4] = {3, 2, 1, 0};
  for (int bits = 0; bits < 4; ++bits) {
    const auto probs = scalar_port_distribution(mode(MubBasis::scalar, bits, l));
    for (int p = 0; p < 4; ++p) {
      CHECK(probs[static_cast<std::size_t>(p)] ==
            doctest::Approx(p == expected_port[bits] ? 1.0 : 0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("either analyser sees the other basis as uniform noise") {
  const int l = 1;
  for (int bits = 0; bits < 4; ++bits) {
    for (const double p : vector_port_distribution(mode(MubBasis::scalar, bits, l), kDelta)) {
      CHECK(p == doctest::Approx(0.25).epsilon(1e-9));
    }
    for (const double p : scalar_port_distribution(mode(MubBasis::vector, bits, l))) {
      CHECK(p == doctest::Approx(0.25).epsilon(1e-9));
    }
  }
}

TEST_CASE("port probabilities always sum to one") {
  RandomStream rng(17, 0);
  const int l = 4;
  for (int i = 0; i < 25; ++i) {
    auto s = zero_state<double>(ModeBasis::codebook(l));
    for (int k = 0; k < 4; ++k) s.amps[k] = std::complex<double>(rng.normal(), rng.normal());
    s = normalized(s);
    double tv = 0.0;
    double ts = 0.0;
    for (const double p : vector_port_distribution(s, kDelta)) tv += p;
    for (const double p : scalar_port_distribution(s)) ts += p;
    CHECK(tv == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ts == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sample_port walks the cumulative brackets") {
  // Dyadic probabilities keep the bracket edges exact.
  const std::array<double, 4> probs = {0.125, 0.25, 0.375, 0.25};
  CHECK(sample_port(probs, 0.05) == 0);
  CHECK(sample_port(probs, 0.125) == 1);
  CHECK(sample_port(probs, 0.3) == 1);
  CHECK(sample_port(probs, 0.375) == 2);
  CHECK(sample_port(probs, 0.76) == 3);
  CHECK(sample_port(probs, 0.999999) == 3);

  // Numerical deficit falls through to the last port.
  const std::array<double, 4> lossy = {0.25, 0.25, 0.25, 0.2499999};
  CHECK(sample_port(lossy, 0.99999999) == 3);
}

TEST_CASE("deterministic analysers translate ports through the map") {
  const PortMap map;
  const int l = 10;
  const auto v11 = vector_analyse(mode(MubBasis::vector, 3, l), kDelta, 0.5, map);
  REQUIRE(v11.click);
  CHECK(*v11.bits == 3);
  CHECK(*v11.port == DetectorPort{MubBasis::vector, Path::c, -1});

  const auto s10 = scalar_analyse(mode(MubBasis::scalar, 2, l), 0.5, map);
  REQUIRE(s10.click);
  CHECK(*s10.bits == 2);
  CHECK(*s10.port == DetectorPort{MubBasis::scalar, Path::a, -1});
}

TEST_CASE("a mode filter clicks with half the overlap probability") {
  const int l = 10;
  const auto v00 = mode(MubBasis::vector, 0, l);
  const auto v01 = mode(MubBasis::vector, 1, l);
  const auto s00 = mode(MubBasis::scalar, 0, l);
  CHECK(filter_click_probability(v00, v00) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(filter_click_probability(s00, v00) == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(filter_click_probability(v01, v00) < 1e-12);

  const auto hit = filter_analyse(v00, {MubBasis::vector, 0}, v00, 0.49);
  REQUIRE(hit.click);
  CHECK(*hit.bits == 0);
  const auto miss = filter_analyse(v00, {MubBasis::vector, 0}, v00, 0.51);
  CHECK_FALSE(miss.click);
  CHECK_FALSE(miss.bits.has_value());
}

TEST_CASE("the filter bank scans the four modes of one basis") {
  const int l = 10;
  const auto codebook = codebook_states(l);

  // Matched basis: only the target filter can fire, with probability 1/2.
  const auto hit = filter_bank_analyse(mode(MubBasis::vector, 2, l), MubBasis::vector, codebook, 0.49);
  REQUIRE(hit.click);
  CHECK(*hit.bits == 2);
  CHECK_FALSE(filter_bank_analyse(mode(MubBasis::vector, 2, l), MubBasis::vector, codebook, 0.51).click);

  // Cross basis: four filters at 1/8 each, scanned in bit order.
  const auto cross = mode(MubBasis::vector, 0, l);
  CHECK(*filter_bank_analyse(cross, MubBasis::scalar, codebook, 0.05).bits == 0);
  CHECK(*filter_bank_analyse(cross, MubBasis::scalar, codebook, 0.30).bits == 2);
  CHECK(*filter_bank_analyse(cross, MubBasis::scalar, codebook, 0.49).bits == 3);
  CHECK_FALSE(filter_bank_analyse(cross, MubBasis::scalar, codebook, 0.51).click);
}

TEST_CASE("sorter positions scale linearly with the OAM index") {
  const SorterGeometry geom;
  CHECK(sorter_position(geom, 10) == doctest::Approx(0.0002625).epsilon(1e-12));
  CHECK(sorter_position(geom, -10) == doctest::Approx(-0.0002625).epsilon(1e-12));
  CHECK(sorter_position(geom, 0) == 0.0);
}

TEST_CASE("the log-polar map unwraps azimuth and radius") {
  const SorterGeometry geom;
  const auto on_axis = conformal_map(geom, 2 * geom.scale_b, 0.0);
  CHECK(on_axis[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(on_axis[1] == doctest::Approx(-0.0008825424006106065).epsilon(1e-12));

  const auto quarter = conformal_map(geom, 0.0, geom.scale_b);
  CHECK(quarter[0] == doctest::Approx(geom.aperture_d / 4).epsilon(1e-12));
  CHECK(quarter[1] == doctest::Approx(0.0).epsilon(1e-15));

  CHECK_THROWS_AS(conformal_map(geom, 0.0, 0.0), std::domain_error);
}
