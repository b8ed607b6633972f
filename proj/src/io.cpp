#include "triode/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "triode/error.hpp"

namespace triode::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t field_hash(const Field &field) {
  const auto *p = reinterpret_cast<const char *>(field.values.data());
  return fnv1a(std::string_view(p, field.values.size() * sizeof(Vec2)));
}

std::uint64_t file_hash(const fs::path &path) { return fnv1a(read_file(path)); }

void write_atomic(const fs::path &path, std::string_view data) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const PotentialSpec &spec) {
  json j;
  j["kind"] = to_string(spec.kind());
  json wells = json::array();
  for (int i = 0; i < 3; ++i) wells.push_back({spec.wells()[i].x, spec.wells()[i].y});
  j["wells"] = wells;
  if (spec.kind() == PotentialKind::PerturbedCubic) {
    const Perturbation &b = spec.perturbation();
    j["perturbation"] = {{"amplitude", b.amplitude},
                         {"radius", b.radius},
                         {"center", {b.center.x, b.center.y}},
                         {"tilt", b.tilt},
                         {"tilt_angle", b.tilt_angle}};
  }
  return j;
}

PotentialSpec potential_from_json(const json &j) {
  try {
    const PotentialKind kind = parse_potential_kind(j.at("kind").get<std::string>());
    switch (kind) {
      case PotentialKind::Cubic: return PotentialSpec::cubic();
      case PotentialKind::PerturbedCubic: {
        const json &p = j.at("perturbation");
        Perturbation b;
        b.amplitude = p.at("amplitude").get<double>();
        b.radius = p.at("radius").get<double>();
        b.center = {p.at("center").at(0).get<double>(), p.at("center").at(1).get<double>()};
        b.tilt = p.value("tilt", b.tilt);
        b.tilt_angle = p.value("tilt_angle", b.tilt_angle);
        return PotentialSpec::perturbed_cubic(b);
      }
      case PotentialKind::UserPolynomial: {
        WellSet w;
        for (int i = 0; i < 3; ++i) {
          w.a[i] = {j.at("wells").at(i).at(0).get<double>(), j.at("wells").at(i).at(1).get<double>()};
        }
        return PotentialSpec::user_polynomial(w);
      }
    }
  } catch (const json::exception &e) {
    throw Error(ErrorKind::InvalidInput, std::string("potential block: ") + e.what());
  }
  throw Error(ErrorKind::InvalidInput, "potential block: unknown kind");
}

fs::path sidecar_path(const fs::path &path) {
  fs::path p = path;
  p += ".json";
  return p;
}

void write_field(const fs::path &path, const Field &field, const PotentialSpec &spec) {
  const DiskGrid &g = *field.grid;
  std::string bytes(field.values.size() * 2 * sizeof(double), '\0');
  char *out = bytes.data();
  for (const Vec2 &v : field.values) {
    std::memcpy(out, &v.x, sizeof(double));
    std::memcpy(out + sizeof(double), &v.y, sizeof(double));
    out += 2 * sizeof(double);
  }
  json side = {{"format_version", kFormatVersion},
               {"N", g.n()},
               {"h", g.h()},
               {"epsilon", field.epsilon},
               {"c0", field.c0},
               {"clamp", field.clamp},
               {"layout", "row-major float64 pairs (u1,u2), row index = y"},
               {"potential", to_json(spec)},
               {"values_fnv1a", hex64(fnv1a(bytes))}};
  write_atomic(path, bytes);
  write_atomic(sidecar_path(path), side.dump(2) + "\n");
}

FieldFile read_field(const fs::path &path) {
  json side;
  try {
    side = json::parse(read_file(sidecar_path(path)));
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::Io, "bad sidecar for " + path.string() + ": " + e.what());
  }
  try {
    if (side.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorKind::Io, "unsupported field format_version in " + path.string());
    }
    const int n = side.at("N").get<int>();
    PotentialSpec spec = potential_from_json(side.at("potential"));
    auto grid = std::make_shared<const DiskGrid>(n);
    const std::string bytes = read_file(path);
    if (bytes.size() != grid->size() * 2 * sizeof(double)) {
      throw Error(ErrorKind::Io, "field dump " + path.string() + " has wrong size");
    }
    if (side.contains("values_fnv1a") && side["values_fnv1a"].get<std::string>() != hex64(fnv1a(bytes))) {
      throw Error(ErrorKind::Io, "field dump " + path.string() + " does not match its checksum");
    }
    Field f(grid, side.at("epsilon").get<double>(), side.at("c0").get<double>(), spec.wells(),
            side.value("clamp", true));
    const char *in = bytes.data();
    for (Vec2 &v : f.values) {
      std::memcpy(&v.x, in, sizeof(double));
      std::memcpy(&v.y, in + sizeof(double), sizeof(double));
      in += 2 * sizeof(double);
    }
    return FieldFile{std::move(f), spec};
  } catch (const json::exception &e) {
    throw Error(ErrorKind::Io, "bad sidecar for " + path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string profile_csv(const ConnectionProfile &p) {
  std::string s = "eta,u1,u2\n";
  for (int k = 0; k < p.n; ++k) {
    s += format_double(p.eta(k)) + "," + format_double(p.values[k].x) + "," +
         format_double(p.values[k].y) + "\n";
  }
  return s;
}

}  // namespace triode::io
