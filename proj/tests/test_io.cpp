#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "triode/error.hpp"
#include "triode/io.hpp"

using namespace triode;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("triode-io-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("fnv1a reference vectors") {
    CHECK(io::hex64(io::fnv1a("")) == "cbf29ce484222325");
    CHECK(io::hex64(io::fnv1a("a")) == "af63dc4c8601ec8c");
    CHECK(io::hex64(io::fnv1a("foobar")) == "85944171f73967e8");
  }

  TEST_CASE("doubles print round-trippably") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1.8371173070873834}) CHECK(std::stod(io::format_double(v)) == v);
  }

  TEST_CASE("field dump round trip is bitwise") {
    TempDir tmp;
    const Field &f = support::minimizer(0.2).field;
    const fs::path path = tmp.path / "field.bin";
    io::write_field(path, f, support::cubic());
    CHECK(fs::file_size(path) == f.values.size() * 16);

    const io::FieldFile back = io::read_field(path);
    CHECK(back.field.values == f.values);
    CHECK(back.field.grid->n() == f.grid->n());
    CHECK(back.field.epsilon == f.epsilon);
    CHECK(back.field.c0 == f.c0);
    CHECK(back.spec.kind() == PotentialKind::Cubic);
    CHECK(io::field_hash(back.field) == io::field_hash(f));

    const nlohmann::json side = nlohmann::json::parse(io::read_file(io::sidecar_path(path)));
    for (const char *key : {"format_version", "N", "h", "epsilon", "c0", "layout", "potential", "values_fnv1a"}) {
      CHECK(side.contains(key));
    }
    CHECK(side["values_fnv1a"] == io::hex64(io::file_hash(path)));

    // Row-major pairs, row index = y: node (i, j) sits at byte 16 (j N + i).
    const int i = 10, j = 30;
    std::ifstream in(path, std::ios::binary);
    in.seekg(16 * (static_cast<std::streamoff>(j) * f.grid->n() + i));
    double xy[2];
    in.read(reinterpret_cast<char *>(xy), sizeof xy);
    CHECK(xy[0] == f.values[f.grid->index(i, j)].x);
    CHECK(xy[1] == f.values[f.grid->index(i, j)].y);
  }

  TEST_CASE("perturbed potential survives the sidecar") {
    TempDir tmp;
    Perturbation b;
    b.amplitude = 0.7;
    b.radius = 0.15;
    b.center = {-1.1, 0.2};
    const PotentialSpec spec = PotentialSpec::perturbed_cubic(b);
    const Field f = Field::constant(support::grid(33), 0.2, 0.4, spec.wells(), spec.wells()[1], true);
    io::write_field(tmp.path / "p.bin", f, spec);
    const io::FieldFile back = io::read_field(tmp.path / "p.bin");
    CHECK(back.spec.kind() == PotentialKind::PerturbedCubic);
    CHECK(back.spec.eval({-1.1, 0.25}) == spec.eval({-1.1, 0.25}));
  }

  TEST_CASE("bad field dumps are rejected") {
    TempDir tmp;
    const Field f = Field::constant(support::grid(33), 0.2, 0.4, WellSet::cube_roots(), WellSet::cube_roots()[0], true);
    const fs::path path = tmp.path / "f.bin";
    io::write_field(path, f, support::cubic());

    nlohmann::json side = nlohmann::json::parse(io::read_file(io::sidecar_path(path)));
    side["format_version"] = io::kFormatVersion + 1;
    io::write_atomic(io::sidecar_path(path), side.dump());
    CHECK_THROWS_AS(io::read_field(path), Error);

    io::write_field(path, f, support::cubic());
    std::string bytes = io::read_file(path);
    bytes[100] ^= 1;
    io::write_atomic(path, bytes);
    CHECK_THROWS_AS(io::read_field(path), Error);

    io::write_atomic(path, bytes.substr(16));
    CHECK_THROWS_AS(io::read_field(path), Error);

    io::write_atomic(io::sidecar_path(path), "{not json");
    CHECK_THROWS_AS(io::read_field(path), Error);
    CHECK_THROWS_AS(io::read_field(tmp.path / "missing.bin"), Error);
  }

  TEST_CASE("atomic write replaces the target and leaves no temp file") {
    TempDir tmp;
    const fs::path p = tmp.path / "out.txt";
    io::write_atomic(p, "first");
    io::write_atomic(p, "second");
    CHECK(io::read_file(p) == "second");
    int entries = 0;
    for (const auto &e : fs::directory_iterator(tmp.path)) entries += e.is_regular_file();
    CHECK(entries == 1);
    io::write_atomic(tmp.path / "sub" / "dir" / "x.txt", "x");
    CHECK(io::read_file(tmp.path / "sub" / "dir" / "x.txt") == "x");
    CHECK_THROWS_AS(io::write_atomic(p / "below-a-file.txt", "x"), Error);
  }

  TEST_CASE("profile csv") {
    const ConnectionProfile &p = support::connections()[0];
    const std::string csv = io::profile_csv(p);
    CHECK(csv.rfind("eta,u1,u2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == p.n + 1);
  }

  TEST_CASE("potential json round trip") {
    const PotentialSpec u = PotentialSpec::user_polynomial(WellSet::cube_roots());
    const PotentialSpec back = io::potential_from_json(io::to_json(u));
    CHECK(back.kind() == PotentialKind::UserPolynomial);
    CHECK(back.eval({0.3, 0.2}) == u.eval({0.3, 0.2}));
    CHECK_THROWS_AS(io::potential_from_json({{"kind", "quartic"}}), Error);
  }
}
