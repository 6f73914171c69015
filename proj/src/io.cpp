#include "fracshape/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fracshape {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& s, int line) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(line, "malformed number '" + s + "'");
  }
  if (pos != s.size()) fail(line, "malformed number '" + s + "'");
  if (!std::isfinite(v)) fail(line, "number '" + s + "' is not finite");
  return v;
}

int parse_int(const std::string& s, int line) {
  std::size_t pos = 0;
  int v;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    fail(line, "malformed integer '" + s + "'");
  }
  if (pos != s.size()) fail(line, "malformed integer '" + s + "'");
  return v;
}

double parse_positive(const std::string& key, const std::string& s, int line) {
  double v = parse_number(s, line);
  if (!(v > 0.0)) fail(line, key + " must be positive");
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

// Atomic file write: temp file in the same directory, then rename.
void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) throw ParseError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

}  // namespace

LoadSchedule RunConfig::schedule() const {
  return LoadSchedule::stepped(mode, coarse_increment_um, switch_at_um, fine_increment_um, max_loadsteps);
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  bool saw_schedule = false;
  bool explicit_switch = false;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header");
      section = s.substr(1, s.size() - 2);
      if (section != "material" && section != "specimen" && section != "schedule" &&
          section != "optimizer" && section != "output") {
        fail(line, "unknown section [" + section + "]");
      }
      if (section == "schedule") saw_schedule = true;
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) fail(line, "expected 'key = value'");
    if (section.empty()) fail(line, "key outside of any section");

    if (section == "material") {
      if (key == "lambda") cfg.material.lambda = parse_positive(key, value, line);
      else if (key == "mu") cfg.material.mu = parse_positive(key, value, line);
      else if (key == "gc") cfg.material.gc = parse_positive(key, value, line);
      else if (key == "nu") cfg.material.nu_vol = parse_positive(key, value, line);
      else if (key == "a_metric") cfg.material.a_metric = parse_positive(key, value, line);
      else fail(line, "unknown key '" + key + "' in [material]");
    } else if (section == "specimen") {
      if (key == "tip") {
        auto tip = tip_from_name(value);
        if (!tip) fail(line, "tip must be flat, round or pointy");
        cfg.specimen.tip = *tip;
      } else if (key == "delta") {
        cfg.specimen.delta = parse_positive(key, value, line);
        if (cfg.specimen.delta > 0.05) fail(line, "delta must be at most 0.05");
      } else if (key == "level") {
        auto level = level_from_name(value);
        if (!level) fail(line, "unknown refinement level '" + value + "'");
        cfg.specimen.level = *level;
      } else {
        fail(line, "unknown key '" + key + "' in [specimen]");
      }
    } else if (section == "schedule") {
      if (key == "mode") {
        if (value == "tension") cfg.mode = LoadMode::Tension;
        else if (value == "shear") cfg.mode = LoadMode::Shear;
        else fail(line, "mode must be tension or shear");
      } else if (key == "coarse_increment_um") {
        cfg.coarse_increment_um = parse_positive(key, value, line);
      } else if (key == "switch_at_um") {
        cfg.switch_at_um = parse_positive(key, value, line);
        explicit_switch = true;
      } else if (key == "fine_increment_um") {
        cfg.fine_increment_um = parse_positive(key, value, line);
      } else if (key == "max_loadsteps") {
        cfg.max_loadsteps = parse_int(value, line);
        if (cfg.max_loadsteps <= 0) fail(line, "max_loadsteps must be positive");
      } else {
        fail(line, "unknown key '" + key + "' in [schedule]");
      }
    } else if (section == "optimizer") {
      if (key == "armijo_tau0") cfg.optimizer.armijo_tau0 = parse_positive(key, value, line);
      else if (key == "armijo_c") cfg.optimizer.armijo_c = parse_positive(key, value, line);
      else if (key == "tau_min") cfg.optimizer.tau_min = parse_positive(key, value, line);
      else if (key == "tol_efrac") cfg.optimizer.tol_efrac = parse_positive(key, value, line);
      else if (key == "tol_gradnorm") cfg.optimizer.tol_gradnorm = parse_positive(key, value, line);
      else if (key == "quality_threshold") cfg.optimizer.quality_threshold = parse_positive(key, value, line);
      else if (key == "max_opt_iters") cfg.optimizer.max_opt_iters = parse_int(value, line);
      else if (key == "epsilon_gap") cfg.optimizer.penalty.epsilon_gap = parse_number(value, line);
      else if (key == "newton_tol") cfg.optimizer.penalty.newton_tol = parse_positive(key, value, line);
      else if (key == "newton_max_iter") cfg.optimizer.penalty.newton_max_iter = parse_int(value, line);
      else fail(line, "unknown key '" + key + "' in [optimizer]");
    } else if (section == "output") {
      if (key == "directory") cfg.output_directory = value;
      else if (key == "snapshot_every") {
        cfg.snapshot_every = parse_int(value, line);
        if (cfg.snapshot_every <= 0) fail(line, "snapshot_every must be positive");
      } else {
        fail(line, "unknown key '" + key + "' in [output]");
      }
    }
  }
  if (!saw_schedule) throw ParseError("missing required section [schedule]");
  if (cfg.mode == LoadMode::Shear && !explicit_switch) {
    cfg.switch_at_um = 9.0;  // shear loads ramp coarsely to 9 um
  }
  if (cfg.optimizer.penalty.epsilon_gap < 0.0) {
    throw ParseError("epsilon_gap must be nonnegative");
  }
  cfg.optimizer.target_h = level_target_h(cfg.specimen.level);
  cfg.material.check();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void write_mesh(const std::string& path, const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.nodes.size() * 48);
  out += "fracmesh 1\n";
  out += "nodes " + std::to_string(mesh.nodes.size()) + "\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    out += std::to_string(i) + " " + fmt17(mesh.nodes[i].x()) + " " + fmt17(mesh.nodes[i].y()) + "\n";
  }
  out += "triangles " + std::to_string(mesh.triangles.size()) + "\n";
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    out += std::to_string(t) + " " + std::to_string(tri[0]) + " " + std::to_string(tri[1]) + " " +
           std::to_string(tri[2]) + "\n";
  }
  out += "boundary " + std::to_string(mesh.boundary.size()) + "\n";
  for (const auto& e : mesh.boundary) {
    out += std::to_string(e.a) + " " + std::to_string(e.b) + " " + tag_name(e.tag) + "\n";
  }
  write_atomic(path, out);
}

TriMesh read_mesh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  int line = 0;
  auto next_line = [&](std::string& s) {
    if (!std::getline(in, s)) fail(line + 1, "unexpected end of file");
    ++line;
  };
  std::string s;
  next_line(s);
  {
    std::istringstream hs(s);
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != "fracmesh" || hs.fail()) fail(line, "not a fracmesh file");
    if (version != 1) fail(line, "unsupported fracmesh version " + std::to_string(version));
  }
  TriMesh mesh;
  std::size_t count = 0;
  next_line(s);
  {
    std::istringstream hs(s);
    std::string word;
    hs >> word >> count;
    if (word != "nodes" || hs.fail()) fail(line, "expected 'nodes N'");
  }
  mesh.nodes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    next_line(s);
    std::istringstream ls(s);
    std::size_t id;
    double x, y;
    ls >> id >> x >> y;
    if (ls.fail() || id != i) fail(line, "expected node " + std::to_string(i));
    mesh.nodes[i] = Vec2(x, y);
  }
  next_line(s);
  {
    std::istringstream hs(s);
    std::string word;
    hs >> word >> count;
    if (word != "triangles" || hs.fail()) fail(line, "expected 'triangles M'");
  }
  mesh.triangles.resize(count);
  for (std::size_t t = 0; t < count; ++t) {
    next_line(s);
    std::istringstream ls(s);
    std::size_t id;
    int a, b, c;
    ls >> id >> a >> b >> c;
    if (ls.fail() || id != t) fail(line, "expected triangle " + std::to_string(t));
    for (int v : {a, b, c}) {
      if (v < 0 || v >= mesh.num_nodes()) fail(line, "node index out of range");
    }
    mesh.triangles[t] = {a, b, c};
    if (mesh.triangle_area(static_cast<int>(t)) <= 0.0) {
      fail(line, "triangle " + std::to_string(t) + " violates CCW orientation");
    }
  }
  next_line(s);
  {
    std::istringstream hs(s);
    std::string word;
    hs >> word >> count;
    if (word != "boundary" || hs.fail()) fail(line, "expected 'boundary B'");
  }
  mesh.boundary.resize(count);
  for (std::size_t e = 0; e < count; ++e) {
    next_line(s);
    std::istringstream ls(s);
    int a, b;
    std::string name;
    ls >> a >> b >> name;
    if (ls.fail()) fail(line, "expected 'na nb tag'");
    if (a < 0 || a >= mesh.num_nodes() || b < 0 || b >= mesh.num_nodes()) {
      fail(line, "node index out of range");
    }
    auto tag = tag_from_name(name);
    if (!tag) fail(line, "unknown boundary tag '" + name + "'");
    mesh.boundary[e] = {a, b, *tag};
  }
  // The pinned horizontal faces encode the slit half-width.
  for (const auto& e : mesh.boundary) {
    if (e.tag == BoundaryTag::CrackFixed) {
      mesh.crack_halfwidth = std::abs(mesh.nodes[e.a].y() - 0.5);
      break;
    }
  }
  validate(mesh);
  return mesh;
}

void write_records_csv(const std::string& path, const SimulationResult& result) {
  std::string out =
      "loadstep,wD_x1_mm,wD_x2_mm,E_bulk,E_frac,E_reg,J,tau_x1,tau_x2,opt_iters,remeshes,min_quality,"
      "tip_x1,tip_x2\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.loadstep) + "," + fmt17(r.w_d.x()) + "," + fmt17(r.w_d.y()) + "," +
           fmt17(r.e_bulk) + "," + fmt17(r.e_frac) + "," + fmt17(r.e_reg) + "," + fmt17(r.j) + "," +
           fmt17(r.force.x()) + "," + fmt17(r.force.y()) + "," + std::to_string(r.opt_iters) + "," +
           std::to_string(r.remeshes) + "," + fmt17(r.min_quality) + "," + fmt17(r.tip.x()) + "," +
           fmt17(r.tip.y()) + "\n";
  }
  write_atomic(path, out);
}

}  // namespace fracshape
