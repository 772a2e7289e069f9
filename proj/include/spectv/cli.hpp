#pragma once

#include <spectv/eigenfactory.hpp>
#include <spectv/flows.hpp>
#include <spectv/grid_io.hpp>
#include <spectv/orthobasis.hpp>
#include <spectv/spectral.hpp>
#include <spectv/tv.hpp>

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace spectv::cli {

enum Exit : int { ok = 0, verification_failed = 1, usage = 2 };

struct SolverFlags {
  std::string mode = "iso";
  std::string boundary = "neumann";
  std::string solver = "fista";
  double gapTol = 1e-8;
  int maxIters = 20000;
  double spacing = 0.0;  // 0 keeps the input's spacing

  void add(CLI::App* c, const std::string& defaultBoundary) {
    boundary = defaultBoundary;
    c->add_option("--mode", mode, "TV mode")->check(CLI::IsMember({"iso", "aniso"}))->capture_default_str();
    c->add_option("--boundary", boundary, "boundary convention")
        ->check(CLI::IsMember({"neumann", "periodic", "zero"}))
        ->capture_default_str();
    c->add_option("--solver", solver, "inner prox solver")
        ->check(CLI::IsMember({"fista", "pd", "pd-accel"}))
        ->capture_default_str();
    c->add_option("--gap-tol", gapTol, "relative duality-gap tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--max-iters", maxIters, "inner iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--spacing", spacing, "grid spacing override")->check(CLI::PositiveNumber);
  }

  TvConfig config() const {
    TvConfig c;
    c.mode = mode == "aniso" ? TvMode::anisotropic : TvMode::isotropic;
    c.boundary = boundary == "zero" ? Boundary::zero_exterior
                 : boundary == "periodic" ? Boundary::periodic
                                          : Boundary::neumann;
    c.solver = solver == "pd" ? TvSolver::primal_dual
               : solver == "pd-accel" ? TvSolver::accelerated_primal_dual
                                      : TvSolver::dual_fista;
    c.gapTol = gapTol;
    c.maxInnerIters = maxIters;
    return c;
  }
  void apply_spacing(Grid& g) const {
    if (spacing > 0) g.spacing = spacing;
  }
};

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  std::size_t k = 0;
  while (std::getline(ss, item, ',')) v.push_back(detail::parse_double(item, ++k));
  return v;
}

struct DecomposeResult {
  FlowTrace trace;
  DecompositionArchive archive;
};

inline DecomposeResult decompose(const Grid& f, const std::string& method, double dt, int steps, const TvConfig& cfg) {
  DecomposeResult r;
  if (method == "gf") r.trace = gradient_flow(f, dt, steps, cfg);
  else if (method == "var") r.trace = variational_path(f, dt, steps, cfg);
  else r.trace = iss_flow(f, dt, steps, cfg);
  r.archive = method == "iss" ? compute_psi(r.trace) : compute_phi(r.trace);
  return r;
}

inline int cmd_decompose(const std::string& in, const std::string& out, const std::string& method, double dt,
                         double lambdaMax, int steps, const SolverFlags& sf, bool strict) {
  Grid f = read_grid(in);
  sf.apply_spacing(f);
  if (!(dt > 0)) dt = 1.0 / (4.0 * lambdaMax);
  DecomposeResult r = decompose(f, method, dt, steps, sf.config());
  write_archive(r.archive, out);
  const std::filesystem::path dir(out);
  auto s1 = spectrum(r.archive, SpectrumKind::S1);
  write_spectrum_csv(s1, dir / "S1.csv");
  if (method != "iss") write_spectrum_csv(spectrum(r.archive, SpectrumKind::S2sq, &r.trace), dir / "S2sq.csv");
  write_spectrum_csv(spectrum(r.archive, SpectrumKind::S3sq, nullptr, &f), dir / "S3sq.csv");
  auto peaks = detect_peaks(s1);
  std::cout << "method=" << method << " dt=" << dt << " steps=" << steps << " bands=" << r.archive.bands.size()
            << " peaks=" << peaks.size() << " innerIters=" << r.trace.totalInnerIters
            << " converged=" << (r.trace.converged ? 1 : 0) << '\n';
  for (const auto& p : peaks) std::cout << "peak t=" << p.t << " mass=" << p.mass << '\n';
  if (method == "iss") std::cout << "note: S2 is not defined for ISS archives; S2sq.csv not written\n";
  if (!r.trace.converged) {
    std::cerr << "warning: inner solver stopped at the iteration cap (max gap " << r.trace.maxGap << ")\n";
    if (strict) return verification_failed;
  }
  return ok;
}

inline int cmd_filter(const std::string& archiveDir, const std::string& out, const TransferFunction& H) {
  DecompositionArchive a = read_archive(archiveDir);
  write_grid(apply_filter(a, H), out);
  return ok;
}

inline int cmd_verify(const std::string& in, double tau, double tol, const SolverFlags& sf, const std::string& report) {
  Grid u = read_grid(in);
  sf.apply_spacing(u);
  if (!(tol > 0)) tol = u.ndim() == 2 ? 0.10 : 0.05;
  EigenCheck c = verify_eigenfunction(u, sf.config(), tau);
  std::ostringstream msg;
  msg << "lambda_est=" << c.lambdaEst << " maxRelDeviation=" << c.maxRelDeviation << " iterations=" << c.iterations
      << " converged=" << (c.converged ? 1 : 0) << " tolerance=" << tol;
  std::cout << msg.str() << '\n';
  if (!report.empty()) {
    std::ofstream r(report);
    r << "lambda_est,maxRelDeviation,iterations,converged\n"
      << c.lambdaEst << ',' << c.maxRelDeviation << ',' << c.iterations << ',' << (c.converged ? 1 : 0) << '\n';
  }
  return c.maxRelDeviation <= tol ? ok : verification_failed;
}

struct HaarComparison {
  int tvPeaks = 0;
  int haarNonzeros = 0;
  double lpfError = 0.0;
  double hardThresholdError = 0.0;
};

inline HaarComparison compare_haar(const Grid& f, double tc, double dt, int steps, const TvConfig& cfg) {
  if (f.ndim() != 1) throw Error(Errc::dimensionality, "compare-haar needs a 1D signal");
  HaarComparison c;
  OrthoBasis B = haar_basis(f.size());
  Eigen::VectorXd z = analyze(B, as_vector(f));
  c.haarNonzeros = sparsity_count(z.tail(z.size() - 1), 1e-9);
  Eigen::VectorXd zt = hard_threshold(z, tc);
  zt[0] = z[0];  // keep the scaling coefficient, as the TV mean is kept
  Grid ht = as_grid(synthesize(B, zt), f);
  const double ref = norm2(f);
  c.hardThresholdError = ref > 0 ? norm2(ht - f) / ref : 0.0;
  const double k = kernel_level(f, cfg.boundary);
  if (norm2(f - k) == 0.0) {
    c.lpfError = 0.0;
    return c;
  }
  FlowTrace tr = gradient_flow(f, dt, steps, cfg);
  DecompositionArchive a = compute_phi(tr);
  c.tvPeaks = int(detect_peaks(spectrum(a, SpectrumKind::S1)).size());
  Grid lp = apply_filter(a, ideal_lpf(tc));
  c.lpfError = ref > 0 ? norm2(lp - f) / ref : 0.0;
  return c;
}

inline int run(int argc, char** argv) {
  CLI::App app{"Nonlinear spectral TV decomposition toolkit"};
  app.require_subcommand(1);

  // decompose
  auto* dec = app.add_subcommand("decompose", "decompose a signal/image into spectral bands");
  std::string decIn, decOut, decMethod = "gf";
  double decDt = 0.0, decLambdaMax = 0.5;
  int decSteps = 64;
  bool decStrict = false;
  SolverFlags decSf;
  dec->add_option("input", decIn, "CSV or PGM input")->required()->check(CLI::ExistingFile);
  dec->add_option("outdir", decOut, "archive directory")->required();
  dec->add_option("--method", decMethod, "gf | var | iss")->check(CLI::IsMember({"gf", "var", "iss"}))->capture_default_str();
  dec->add_option("--dt", decDt, "time step (default 1/(4 lambda-max))")->check(CLI::PositiveNumber);
  dec->add_option("--lambda-max", decLambdaMax, "largest expected eigenvalue")->check(CLI::PositiveNumber)->capture_default_str();
  dec->add_option("--steps", decSteps, "number of flow steps")->check(CLI::Range(2, 1000000))->capture_default_str();
  dec->add_flag("--strict", decStrict, "fail when the inner solver hits its cap");
  decSf.add(dec, "neumann");

  // filter
  auto* fil = app.add_subcommand("filter", "apply a transfer function to an archive");
  std::string filIn, filOut, filTf;
  std::optional<double> lpf, hpf, flowstop;
  std::vector<double> bpf, bsf;
  fil->add_option("archive", filIn, "archive directory")->required()->check(CLI::ExistingDirectory);
  fil->add_option("output", filOut, "output grid (.csv or .pgm)")->required();
  auto* oL = fil->add_option("--lpf", lpf, "ideal low-pass at t_c");
  auto* oH = fil->add_option("--hpf", hpf, "ideal high-pass at t_c");
  auto* oB = fil->add_option("--bpf", bpf, "band-pass t1 t2")->expected(2);
  auto* oS = fil->add_option("--bsf", bsf, "band-stop t1 t2")->expected(2);
  auto* oF = fil->add_option("--flowstop", flowstop, "flow-stop filter at t1");
  auto* oT = fil->add_option("--tf", filTf, "transfer function CSV")->check(CLI::ExistingFile);
  for (auto* a : {oL, oH, oB, oS, oF, oT})
    for (auto* b : {oL, oH, oB, oS, oF, oT})
      if (a != b) a->excludes(b);

  // synth-ef
  auto* syn = app.add_subcommand("synth-ef", "synthesize an analytic eigenfunction");
  std::string synKind, synOut, synSpecOut, synBreaks = "0,1,3,4";
  double synH = 1, synW = 32, synX0 = -1, synLambda = 1, synSpacing = 1, synR = 16, synCx = -1, synCy = -1;
  int synSamples = 256, synN = 0, synSize = 128;
  long synK = 0;
  bool synBounded = false, synNegate = false;
  syn->add_option("--kind", synKind, "peak | chain | haar | disk")->required()->check(CLI::IsMember({"peak", "chain", "haar", "disk"}));
  syn->add_option("output", synOut, "output grid (.csv, or .pgm for disks)")->required();
  syn->add_option("--height", synH, "peak height")->capture_default_str();
  syn->add_option("--width", synW, "peak width")->capture_default_str();
  syn->add_option("--x0", synX0, "peak start (default centred)");
  syn->add_option("--lambda", synLambda, "chain eigenvalue")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--breaks", synBreaks, "chain breakpoints, comma separated")->capture_default_str();
  syn->add_flag("--bounded", synBounded, "bounded-domain chain (ends at the domain ends)");
  syn->add_flag("--negate", synNegate, "emit -u");
  syn->add_option("--samples", synSamples, "1D sample count")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--spacing", synSpacing, "1D spacing (haar default 1/samples)")->check(CLI::PositiveNumber);
  syn->add_option("--n", synN, "haar scale index")->check(CLI::NonNegativeNumber)->capture_default_str();
  syn->add_option("--k", synK, "haar shift index")->check(CLI::NonNegativeNumber)->capture_default_str();
  syn->add_option("--radius", synR, "disk radius in pixels")->capture_default_str();
  syn->add_option("--size", synSize, "disk image size")->check(CLI::PositiveNumber)->capture_default_str();
  syn->add_option("--cx", synCx, "disk centre column");
  syn->add_option("--cy", synCy, "disk centre row");
  syn->add_option("--spec-out", synSpecOut, "write the breakpoint spec CSV");
  bool synSpacingSet = false;

  // verify-ef
  auto* ver = app.add_subcommand("verify-ef", "numerically verify an eigenfunction");
  std::string verIn, verReport;
  double verTau = 0.0, verTol = 0.0;
  SolverFlags verSf;
  ver->add_option("input", verIn, "grid to verify")->required()->check(CLI::ExistingFile);
  ver->add_option("--tau", verTau, "prox step (default 0.01 ||u||^2/J(u))")->check(CLI::PositiveNumber);
  ver->add_option("--tol", verTol, "accepted max relative deviation (default 0.05 1D, 0.10 2D)")->check(CLI::PositiveNumber);
  ver->add_option("--report", verReport, "report CSV path");
  verSf.add(ver, "");

  // compare-haar
  auto* cmp = app.add_subcommand("compare-haar", "TV spectral peaks vs Haar coefficients");
  std::string cmpIn, cmpReport;
  double cmpTc = 1.0, cmpDt = 0.25;
  int cmpSteps = 256;
  SolverFlags cmpSf;
  cmp->add_option("input", cmpIn, "1D dyadic-length CSV")->required()->check(CLI::ExistingFile);
  cmp->add_option("--tc", cmpTc, "cutoff for LPF / hard threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmp->add_option("--dt", cmpDt, "flow time step")->check(CLI::PositiveNumber)->capture_default_str();
  cmp->add_option("--steps", cmpSteps, "flow steps")->check(CLI::Range(2, 1000000))->capture_default_str();
  cmp->add_option("--report", cmpReport, "report CSV path");
  cmpSf.add(cmp, "zero");

  // consistency (diagnostic only)
  auto* con = app.add_subcommand("consistency", "re-decompose a band-passed component and report band leakage");
  std::string conIn;
  double conT1 = 0, conT2 = 0, conDt = 0.5;
  int conSteps = 64;
  SolverFlags conSf;
  con->add_option("input", conIn, "CSV or PGM input")->required()->check(CLI::ExistingFile);
  con->add_option("--t1", conT1, "band start")->required()->check(CLI::PositiveNumber);
  con->add_option("--t2", conT2, "band end")->required()->check(CLI::PositiveNumber);
  con->add_option("--dt", conDt, "flow time step")->check(CLI::PositiveNumber)->capture_default_str();
  con->add_option("--steps", conSteps, "flow steps")->check(CLI::Range(2, 1000000))->capture_default_str();
  conSf.add(con, "neumann");

  try {
    app.parse(argc, argv);
    synSpacingSet = syn->count("--spacing") > 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    if (*dec) return cmd_decompose(decIn, decOut, decMethod, decDt, decLambdaMax, decSteps, decSf, decStrict);

    if (*fil) {
      TransferFunction H;
      if (lpf) H = ideal_lpf(*lpf);
      else if (hpf) H = ideal_hpf(*hpf);
      else if (!bpf.empty()) H = band_pass(bpf[0], bpf[1]);
      else if (!bsf.empty()) H = band_stop(bsf[0], bsf[1]);
      else if (flowstop) {
        DecompositionArchive a = read_archive(filIn);
        double tmax = a.domainKind == DomainKind::wavelength ? a.tGrid.back() : 1.0 / a.tGrid.front();
        H = flow_stop_filter(*flowstop, tmax);
      } else if (!filTf.empty()) H = read_transfer_function(filTf);
      else {
        std::cerr << "filter: one of --lpf --hpf --bpf --bsf --flowstop --tf is required\n";
        return usage;
      }
      return cmd_filter(filIn, filOut, H);
    }

    if (*syn) {
      Grid g;
      std::optional<PiecewiseConstantEF> spec;
      double lam = 0;
      if (synKind == "disk") {
        double cx = synCx >= 0 ? synCx : synSize / 2.0, cy = synCy >= 0 ? synCy : synSize / 2.0;
        auto d = disk_indicator(synR, cx, cy, std::size_t(synSize), std::size_t(synSize));
        g = d.grid;
        lam = d.lambda;
      } else {
        Domain1d dom{std::size_t(synSamples), synSpacing};
        if (synKind == "haar" && !synSpacingSet) dom.spacing = 1.0 / synSamples;
        EigenGrid e;
        if (synKind == "peak") {
          double x0 = synX0 >= 0 ? synX0 : 0.5 * (dom.length() - synW);
          e = single_peak(synH, synW, x0, dom);
        } else if (synKind == "chain") {
          e = piecewise_ef(synLambda, parse_list(synBreaks), synBounded, dom);
        } else {
          e = haar_atom(synN, synK, dom);
        }
        if (e.snapped) std::cerr << "warning: breakpoints snapped to the sample lattice\n";
        g = e.grid;
        lam = e.lambda;
        spec = e.ef;
      }
      if (synNegate) g = -1.0 * g;
      if (is_pgm_path(synOut)) write_pgm(g, synOut, false);
      else write_csv(g, synOut);
      if (!synSpecOut.empty() && spec) write_ef_csv(*spec, synSpecOut);
      std::cout << "lambda=" << lam << '\n';
      return ok;
    }

    if (*ver) {
      Grid probe = read_grid(verIn);
      if (verSf.boundary.empty()) verSf.boundary = probe.ndim() == 2 ? "neumann" : "zero";
      return cmd_verify(verIn, verTau, verTol, verSf, verReport);
    }

    if (*cmp) {
      Grid f = read_grid(cmpIn);
      cmpSf.apply_spacing(f);
      if (f.ndim() != 1 || (f.size() & (f.size() - 1)) != 0) {
        std::cerr << "compare-haar: input must be 1D with dyadic length\n";
        return usage;
      }
      HaarComparison c = compare_haar(f, cmpTc, cmpDt, cmpSteps, cmpSf.config());
      std::ostringstream csv;
      csv << "tv_peaks,haar_nonzeros,lpf_rel_error,hard_threshold_rel_error\n"
          << c.tvPeaks << ',' << c.haarNonzeros << ',' << c.lpfError << ',' << c.hardThresholdError << '\n';
      std::cout << csv.str();
      if (!cmpReport.empty()) std::ofstream(cmpReport) << csv.str();
      return ok;
    }

    if (*con) {
      if (!(conT1 < conT2)) throw Error(Errc::invalid_band, "need t1 < t2");
      Grid f = read_grid(conIn);
      conSf.apply_spacing(f);
      TvConfig cfg = conSf.config();
      auto first = decompose(f, "gf", conDt, conSteps, cfg);
      Grid g = apply_filter(first.archive, band_pass(conT1, conT2));
      auto second = decompose(g, "gf", conDt, conSteps, cfg);
      auto s1 = spectrum(second.archive, SpectrumKind::S1);
      double in = 0, all = 0;
      for (std::size_t i = 0; i < s1.values.size(); ++i) {
        all += s1.values[i] * s1.weights[i];
        if (s1.tGrid[i] >= conT1 && s1.tGrid[i] <= conT2) in += s1.values[i] * s1.weights[i];
      }
      std::cout << "in_band_fraction=" << (all > 0 ? in / all : 0.0) << " total_S1=" << all << '\n';
      return ok;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == Errc::io || e.code() == Errc::malformed_input || e.code() == Errc::shape ||
                   e.code() == Errc::validation || e.code() == Errc::geometry || e.code() == Errc::invalid_band ||
                   e.code() == Errc::unsupported_format
               ? usage
               : verification_failed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return verification_failed;
  }
  return usage;
}

}  // namespace spectv::cli
