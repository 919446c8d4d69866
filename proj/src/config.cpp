#include "crossdiff/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace crossdiff {

namespace {

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json j = json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Mat mat_from_json(const json& j) {
  const size_t rows = j.size();
  Mat m(rows, rows == 0 ? 0 : j[0].size());
  for (size_t i = 0; i < rows; ++i) {
    if (j[i].size() != static_cast<size_t>(m.cols()))
      throw DomainError("config: ragged matrix");
    for (size_t k = 0; k < j[i].size(); ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json mat_to_json(const Mat& m) {
  json j = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    j.push_back(vec_to_json(m.row(i).transpose()));
  return j;
}

}  // namespace

json model_to_json(const ModelSpec& model) {
  json j;
  j["pressure"] = {{"d", vec_to_json(model.pressure.d)},
                   {"m", mat_to_json(model.pressure.interaction)},
                   {"s", vec_to_json(model.pressure.exponents)}};
  if (!model.reaction.is_zero()) {
    j["reaction"] = {{"rho", vec_to_json(model.reaction.rho)},
                     {"c", mat_to_json(model.reaction.c)},
                     {"alpha", mat_to_json(model.reaction.alpha)}};
  }
  return j;
}

ModelSpec model_from_json(const json& j) {
  ModelSpec model;
  const json& p = j.at("pressure");
  model.pressure.d = vec_from_json(p.at("d"));
  model.pressure.interaction = mat_from_json(p.at("m"));
  model.pressure.exponents = vec_from_json(p.at("s"));
  const int I = model.pressure.species();
  if (j.contains("reaction")) {
    const json& r = j.at("reaction");
    model.reaction.rho = vec_from_json(r.at("rho"));
    model.reaction.c = mat_from_json(r.at("c"));
    model.reaction.alpha = mat_from_json(r.at("alpha"));
  } else {
    model.reaction.rho = Vec::Zero(I);
    model.reaction.c = Mat::Zero(I, I);
    model.reaction.alpha = Mat::Zero(I, I);
  }
  model.validate();
  return model;
}

Mesh MeshConfig::build() const {
  return dim == 1 ? Mesh::line(extents[0], n[0])
                  : Mesh::rect(extents[0], extents[1], n[0], n[1]);
}

Field InitialConfig::build(const Mesh& mesh, int species) const {
  Field U(mesh, species);
  if (type == "constant") {
    if (constant_values.size() != species)
      throw DomainError("initial: constant values size mismatch");
    for (int i = 0; i < species; ++i) U.values.row(i).setConstant(constant_values[i]);
  } else if (type == "gaussian") {
    if (baseline.size() == species) {
      for (int i = 0; i < species; ++i) U.values.row(i).setConstant(baseline[i]);
    }
    for (const GaussianBump& b : bumps) {
      if (b.species < 0 || b.species >= species)
        throw DomainError("initial: bump species out of range");
      for (int node = 0; node < mesh.num_nodes(); ++node) {
        double r2 = 0.0;
        for (int a = 0; a < mesh.dim; ++a) {
          const double dx = mesh.coordinate(node, a) - b.center[a];
          r2 += dx * dx;
        }
        U.values(b.species, node) +=
            b.amplitude * std::exp(-r2 / (2.0 * b.width * b.width));
      }
    }
  } else if (type == "file") {
    std::ifstream is(path);
    if (!is) throw DomainError("initial: cannot open " + path);
    U = read_field_csv(is, mesh, species);
  } else {
    throw DomainError("initial: unknown type " + type);
  }
  return U;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["model"] = model_to_json(cfg.model);
  j["mesh"] = {{"dim", cfg.mesh.dim},
               {"extents", cfg.mesh.dim == 1
                               ? json::array({cfg.mesh.extents[0]})
                               : json::array({cfg.mesh.extents[0],
                                              cfg.mesh.extents[1]})},
               {"n", cfg.mesh.dim == 1
                         ? json::array({cfg.mesh.n[0]})
                         : json::array({cfg.mesh.n[0], cfg.mesh.n[1]})}};
  j["time"] = {{"T", cfg.time.T}, {"N", cfg.time.N}};
  json init;
  init["type"] = cfg.initial.type;
  if (cfg.initial.type == "constant") {
    init["values"] = vec_to_json(cfg.initial.constant_values);
  } else if (cfg.initial.type == "gaussian") {
    init["baseline"] = vec_to_json(cfg.initial.baseline);
    json bumps = json::array();
    for (const GaussianBump& b : cfg.initial.bumps) {
      json jb;
      jb["species"] = b.species;
      jb["center"] = cfg.mesh.dim == 1
                         ? json::array({b.center[0]})
                         : json::array({b.center[0], b.center[1]});
      jb["width"] = b.width;
      jb["amplitude"] = b.amplitude;
      bumps.push_back(jb);
    }
    init["bumps"] = bumps;
  } else {
    init["path"] = cfg.initial.path;
  }
  j["initial"] = init;
  j["solver"] = {{"newton_tol", cfg.solver.newton_tol},
                 {"max_newton", cfg.solver.max_newton},
                 {"max_picard", cfg.solver.max_picard},
                 {"inversion_tol", cfg.solver.inversion.tol},
                 {"inversion_max_iters", cfg.solver.inversion.max_iters}};
  j["output"] = {{"dir", cfg.output.dir},
                 {"snapshot_stride", cfg.output.snapshot_stride},
                 {"strict", cfg.output.strict}};
  j["seed"] = cfg.seed;
  j["audit_samples"] = cfg.audit_samples;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  cfg.model = model_from_json(j.at("model"));
  const json& m = j.at("mesh");
  cfg.mesh.dim = m.at("dim").get<int>();
  for (size_t a = 0; a < m.at("extents").size() && a < 2; ++a)
    cfg.mesh.extents[a] = m.at("extents")[a].get<double>();
  for (size_t a = 0; a < m.at("n").size() && a < 2; ++a)
    cfg.mesh.n[a] = m.at("n")[a].get<int>();
  cfg.time.T = j.at("time").at("T").get<double>();
  cfg.time.N = j.at("time").at("N").get<int>();

  const json& init = j.at("initial");
  cfg.initial.type = init.at("type").get<std::string>();
  if (cfg.initial.type == "constant") {
    cfg.initial.constant_values = vec_from_json(init.at("values"));
  } else if (cfg.initial.type == "gaussian") {
    cfg.initial.baseline = init.contains("baseline")
                               ? vec_from_json(init.at("baseline"))
                               : Vec();
    for (const json& jb : init.value("bumps", json::array())) {
      GaussianBump b;
      b.species = jb.at("species").get<int>();
      for (size_t a = 0; a < jb.at("center").size() && a < 2; ++a)
        b.center[a] = jb.at("center")[a].get<double>();
      b.width = jb.at("width").get<double>();
      b.amplitude = jb.at("amplitude").get<double>();
      cfg.initial.bumps.push_back(b);
    }
  } else if (cfg.initial.type == "file") {
    cfg.initial.path = init.at("path").get<std::string>();
  } else {
    throw DomainError("config: unknown initial type " + cfg.initial.type);
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    cfg.solver.newton_tol = s.value("newton_tol", cfg.solver.newton_tol);
    cfg.solver.max_newton = s.value("max_newton", cfg.solver.max_newton);
    cfg.solver.max_picard = s.value("max_picard", cfg.solver.max_picard);
    cfg.solver.inversion.tol =
        s.value("inversion_tol", cfg.solver.inversion.tol);
    cfg.solver.inversion.max_iters =
        s.value("inversion_max_iters", cfg.solver.inversion.max_iters);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    cfg.output.dir = o.value("dir", cfg.output.dir);
    cfg.output.snapshot_stride =
        o.value("snapshot_stride", cfg.output.snapshot_stride);
    cfg.output.strict = o.value("strict", cfg.output.strict);
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.audit_samples = j.value("audit_samples", cfg.audit_samples);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot open config file: " + path);
  json j;
  is >> j;
  return config_from_json(j);
}

void write_field_csv(std::ostream& os, const Mesh& mesh, const Field& U) {
  os << (mesh.dim == 1 ? "x" : "x,y");
  for (int i = 0; i < U.species(); ++i) os << ",u_" << (i + 1);
  os << "\n";
  std::ostringstream line;
  line.precision(17);
  for (int node = 0; node < mesh.num_nodes(); ++node) {
    line.str("");
    line << mesh.coordinate(node, 0);
    if (mesh.dim == 2) line << "," << mesh.coordinate(node, 1);
    for (int i = 0; i < U.species(); ++i) line << "," << U.values(i, node);
    os << line.str() << "\n";
  }
}

Field read_field_csv(std::istream& is, const Mesh& mesh, int species) {
  Field U(mesh, species);
  std::string line;
  if (!std::getline(is, line)) throw DomainError("field csv: empty file");
  int node = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (node >= mesh.num_nodes())
      throw DomainError("field csv: more rows than mesh nodes");
    std::istringstream ss(line);
    std::string cell;
    for (int a = 0; a < mesh.dim; ++a) std::getline(ss, cell, ',');
    for (int i = 0; i < species; ++i) {
      if (!std::getline(ss, cell, ','))
        throw DomainError("field csv: missing species column");
      U.values(i, node) = std::stod(cell);
    }
    ++node;
  }
  if (node != mesh.num_nodes())
    throw DomainError("field csv: row count does not match mesh");
  return U;
}

json ledger_row_to_json(const LedgerRow& row) {
  json j;
  j["k"] = row.k;
  j["t"] = row.t;
  json mass = json::array();
  for (Index i = 0; i < row.mass.size(); ++i) mass.push_back(row.mass[i]);
  j["mass"] = mass;
  j["entropy"] = row.entropy;
  j["dissipation"] = row.tau_dissipation;
  j["duality_sum"] = row.duality_sum;
  j["min_u"] = row.min_u;
  j["max_R_inf"] = row.max_R_inf;
  j["newton_iters"] = row.newton_iters;
  j["flags"] = {{"entropy_checked", row.entropy_checked},
                {"mass_identity", row.mass_identity_ok},
                {"mass_growth", row.mass_growth_ok},
                {"entropy_step", row.entropy_step_ok},
                {"entropy_sum", row.entropy_sum_ok},
                {"positivity", row.positivity_ok}};
  return j;
}

}  // namespace crossdiff
