#include "crossdiff/runner.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "crossdiff/diagnostics.hpp"

namespace crossdiff {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& contents) {
    std::ofstream os(dir_ / name, std::ios::binary);
    os << contents;
    manifest_[name] = checksum_hex(contents);
  }

  void finalize() {
    json j;
    j["artifacts"] = manifest_;
    std::ofstream os(dir_ / "manifest.json", std::ios::binary);
    os << j.dump(2) << "\n";
  }

 private:
  static std::string checksum_hex(const std::string& bytes) {
    std::ostringstream ss;
    ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0')
       << fnv1a64(bytes);
    return ss.str();
  }

  fs::path dir_;
  json manifest_ = json::object();
};

std::string snapshot_name(int k) {
  std::ostringstream ss;
  ss << "snapshot_" << std::setw(6) << std::setfill('0') << k << ".csv";
  return ss.str();
}

json opt_pair(const std::optional<std::pair<int, int>>& p) {
  if (!p) return nullptr;
  return json::array({p->first, p->second});
}

}  // namespace

json certificate_to_json(const StructureCertificate& cert) {
  json j;
  json db;
  db["holds"] = cert.detailed_balance.holds;
  if (cert.detailed_balance.pi) {
    json pi = json::array();
    for (Index i = 0; i < cert.detailed_balance.pi->size(); ++i)
      pi.push_back((*cert.detailed_balance.pi)[i]);
    db["pi"] = pi;
  }
  if (!cert.detailed_balance.violated_cycle.empty())
    db["violated_cycle"] = cert.detailed_balance.violated_cycle;
  j["detailed_balance"] = db;

  json pw;
  pw["holds"] = cert.pairwise.holds;
  pw["sampled"] = cert.pairwise.sampled;
  if (cert.pairwise.violating_pair)
    pw["violating_pair"] = opt_pair(cert.pairwise.violating_pair);
  if (cert.pairwise.witness_point) {
    pw["witness_point"] = json::array({cert.pairwise.witness_point->first,
                                       cert.pairwise.witness_point->second});
  }
  j["pairwise"] = pw;

  json rdb;
  rdb["holds"] = cert.relaxed_db.holds;
  if (cert.relaxed_db.violating_pair)
    rdb["violating_pair"] = opt_pair(cert.relaxed_db.violating_pair);
  j["relaxed_db"] = rdb;

  json ue;
  ue["holds"] = cert.uniform_entropy.holds;
  ue["min_margin"] = cert.uniform_entropy.min_margin;
  ue["blocks_ok"] = cert.uniform_entropy.blocks_ok;
  ue["samples_skipped"] = cert.uniform_entropy.skipped;
  if (cert.uniform_entropy.worst_point.size() > 0) {
    json wp = json::array();
    for (Index i = 0; i < cert.uniform_entropy.worst_point.size(); ++i)
      wp.push_back(cert.uniform_entropy.worst_point[i]);
    ue["worst_point"] = wp;
  }
  j["uniform_entropy"] = ue;
  j["certified"] = cert.certified();
  return j;
}

int run_audit(const RunConfig& cfg, const std::string& out_dir,
              std::ostream& log, std::ostream& err) {
  try {
    const StructureCertificate cert =
        certify(cfg.model, cfg.audit_samples, cfg.seed);
    ArtifactWriter out(out_dir);
    out.write("certificate.json", certificate_to_json(cert).dump(2) + "\n");
    out.finalize();
    log << "audit: " << (cert.certified() ? "certified" : "not certified")
        << "\n";
    return cert.certified() ? kExitOk : kExitNotCertified;
  } catch (const std::exception& e) {
    err << "audit error: " << e.what() << "\n";
    return kExitError;
  }
}

int run_simulate(const RunConfig& cfg, const std::string& out_dir,
                 std::ostream& log, std::ostream& err) {
  try {
    RunConfig local = cfg;
    const StructureCertificate cert =
        certify(local.model, local.audit_samples, local.seed);
    if (cert.certified()) local.model.entropy = cert.entropy_spec;

    const Mesh mesh = local.mesh.build();
    validate_time_grid(local.model, local.time);
    const Field U_in = local.initial.build(mesh, local.model.species());

    ArtifactWriter out(out_dir);
    std::ostringstream ledger;
    RunSettings settings;
    settings.solver = local.solver;
    settings.snapshot_stride = local.output.snapshot_stride;
    settings.strict = local.output.strict;

    RunSinks sinks;
    sinks.on_snapshot = [&](int k, const Field& U) {
      std::ostringstream csv;
      csv.precision(17);
      write_field_csv(csv, mesh, U);
      out.write(snapshot_name(k), csv.str());
    };
    sinks.on_row = [&](const LedgerRow& row) {
      ledger << ledger_row_to_json(row).dump() << "\n";
    };

    int exit_code = kExitOk;
    Trajectory traj;
    try {
      traj = run(local.model, mesh, local.time, U_in, settings, sinks);
    } catch (const DiagnosticViolation& e) {
      err << "simulate: " << e.what() << "\n";
      out.write("ledger.ndjson", ledger.str());
      json summary;
      summary["status"] = "diagnostic_violation";
      summary["message"] = e.what();
      out.write("summary.json", summary.dump(2) + "\n");
      out.finalize();
      return kExitDiagnosticViolation;
    }
    out.write("ledger.ndjson", ledger.str());

    json summary;
    summary["certified"] = cert.certified();
    summary["entropy_bound"] = traj.entropy_bound;
    bool mass_id = true, mass_gr = true, ent_step = true, ent_sum = true,
         positive = true;
    for (const LedgerRow& row : traj.ledger) {
      mass_id &= row.mass_identity_ok;
      mass_gr &= row.mass_growth_ok;
      ent_step &= row.entropy_step_ok;
      ent_sum &= row.entropy_sum_ok;
      positive &= row.positivity_ok;
    }
    summary["estimates"] = {{"mass_identity", mass_id},
                            {"mass_growth", mass_gr},
                            {"entropy_step", ent_step},
                            {"entropy_sum", ent_sum},
                            {"positivity", positive}};
    bool all_ok = mass_id && mass_gr && ent_step && ent_sum && positive;
    if (local.output.snapshot_stride == 1) {
      const DualityReport rep = duality_check(local.model, traj);
      summary["duality"] = {{"lhs", rep.lhs},
                            {"rhs", rep.rhs},
                            {"ratio", rep.ratio},
                            {"pass", rep.pass}};
      const MassBoundCheck mb = mass_bound_check(local.model, traj);
      summary["mass_bounds"] = {{"max_mass", mb.max_mass_ok},
                                {"reaction_sum", mb.reaction_ok}};
      all_ok = all_ok && rep.pass && mb.max_mass_ok && mb.reaction_ok;
    }
    summary["status"] = all_ok ? "ok" : "estimate_failure";
    out.write("summary.json", summary.dump(2) + "\n");
    out.finalize();
    if (!all_ok) {
      err << "simulate: some estimates failed, see summary.json\n";
      exit_code = kExitDiagnosticViolation;
    } else {
      log << "simulate: " << traj.time.N << " steps, all estimates ok\n";
    }
    return exit_code;
  } catch (const std::exception& e) {
    err << "simulate error: " << e.what() << "\n";
    return kExitError;
  }
}

int run_converge(const RunConfig& cfg, int levels, const std::string& out_dir,
                 std::ostream& log, std::ostream& err) {
  try {
    if (levels < 2) throw DomainError("converge: need at least 2 levels");
    RunConfig local = cfg;
    const StructureCertificate cert =
        certify(local.model, local.audit_samples, local.seed);
    if (cert.certified()) local.model.entropy = cert.entropy_spec;
    const Mesh mesh = local.mesh.build();
    const Field U_in = local.initial.build(mesh, local.model.species());

    std::vector<Field> finals;
    std::vector<int> step_counts;
    for (int level = 0; level < levels; ++level) {
      TimeGrid tg{local.time.T, local.time.N << level};
      validate_time_grid(local.model, tg);
      RunSettings settings;
      settings.solver = local.solver;
      settings.snapshot_stride = tg.N;  // final snapshot only
      Trajectory traj = run(local.model, mesh, tg, U_in, settings);
      finals.push_back(traj.snapshots.back());
      step_counts.push_back(tg.N);
    }

    json table = json::array();
    std::vector<double> diffs;
    for (int level = 0; level + 1 < levels; ++level) {
      const Mat d =
          (finals[level].values - finals[level + 1].values).cwiseAbs();
      diffs.push_back(d.sum() * mesh.cell_volume());
    }
    log << "converge: T = " << local.time.T << "\n";
    for (size_t l = 0; l < diffs.size(); ++l) {
      json row;
      row["N"] = step_counts[l];
      row["l1_diff_to_next"] = diffs[l];
      if (l > 0) {
        const double order =
            diffs[l] > 0.0 ? std::log2(diffs[l - 1] / diffs[l])
                           : std::numeric_limits<double>::quiet_NaN();
        row["observed_order"] = order;
        log << "  N=" << step_counts[l] << " diff=" << diffs[l]
            << " order=" << order << "\n";
      } else {
        log << "  N=" << step_counts[l] << " diff=" << diffs[l] << "\n";
      }
      table.push_back(row);
    }
    ArtifactWriter out(out_dir);
    json j;
    j["levels"] = table;
    out.write("converge.json", j.dump(2) + "\n");
    out.finalize();
    return kExitOk;
  } catch (const std::exception& e) {
    err << "converge error: " << e.what() << "\n";
    return kExitError;
  }
}

int run_invert(const RunConfig& cfg, const Vec& W, std::ostream& log,
               std::ostream& err) {
  try {
    const Vec X = invert_A(cfg.model, W, cfg.solver.inversion);
    const Vec res = eval_A(cfg.model, X) - W;
    log.precision(17);
    log << "X =";
    for (Index i = 0; i < X.size(); ++i) log << " " << X[i];
    log << "\nresidual_inf = " << res.lpNorm<Eigen::Infinity>() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "invert error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace crossdiff
