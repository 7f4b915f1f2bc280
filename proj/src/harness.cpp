#include "crbkit/harness.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>

#include "crbkit/estimators.hpp"
#include "crbkit/kernels.hpp"
#include "crbkit/rng.hpp"

namespace crbkit {

bool RunResult::violated() const {
  for (const auto& r : reports)
    if (r.verdict == Verdict::violated) return true;
  return false;
}

// ---- builders ---------------------------------------------------------------

MatrixXd lower_triangular_shaping(Index n) {
  MatrixXd a = MatrixXd::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) a(i, j) = 0.5;
  return a;
}

namespace {

MatrixXd real_matrix(const json& v) {
  const Index n = static_cast<Index>(v.size());
  MatrixXd m(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) m(r, c) = v[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  return m;
}

cplx complex_value(const json& v) { return {v[0].get<double>(), v[1].get<double>()}; }

VectorXcd complex_vector(const json& v) {
  VectorXcd x(static_cast<Index>(v.size()));
  for (Index i = 0; i < x.size(); ++i) x(i) = complex_value(v[static_cast<std::size_t>(i)]);
  return x;
}

BaseFamily base_from_json(const json& block) {
  const std::string fam = block.at("family").get<std::string>();
  if (fam == "laplace") return BaseFamily::laplace();
  if (fam == "student_t") return BaseFamily::student_t(block.at("nu").get<double>());
  if (fam == "gauss_mixture") {
    const json& mx = block.at("mixture");
    auto w = mx.at("weights").get<std::vector<double>>();
    auto mu = mx.at("means").get<std::vector<double>>();
    auto var = mx.at("variances").get<std::vector<double>>();
    if (mx.at("standardize").get<bool>())
      return BaseFamily::gauss_mixture(MixtureComponents::standardized(std::move(w), std::move(mu), std::move(var)));
    return BaseFamily::gauss_mixture({std::move(w), std::move(mu), std::move(var)});
  }
  throw std::invalid_argument("no base family for '" + fam + "'");
}

MatrixXd shaping_from_json(const json& block) {
  const Index n = block.at("dim").get<Index>();
  const json& s = block.at("shaping");
  if (s.is_string()) return s.get<std::string>() == "identity" ? MatrixXd::Identity(n, n) : lower_triangular_shaping(n);
  return real_matrix(s);
}

}  // namespace

NoiseModel noise_from_json(const json& block) {
  const std::string fam = block.at("family").get<std::string>();
  if (fam == "gaussian") {
    if (block.contains("covariance")) return make_gaussian(real_matrix(block.at("covariance")));
    const MatrixXd a = shaping_from_json(block);
    return make_gaussian(symmetrize(a * a.transpose()));
  }
  return make_shaped(base_from_json(block), shaping_from_json(block));
}

MatrixXcd complex_covariance_from_json(const json& block, Index n, double signal_power) {
  const json& c = block.at("complex_covariance");
  const std::string type = c.at("type").get<std::string>();
  MatrixXcd s(n, n);
  if (type == "matrix") {
    for (Index r = 0; r < n; ++r)
      for (Index k = 0; k < n; ++k)
        s(r, k) = complex_value(c.at("value")[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
  } else {
    const double v = c.at("variance").get<double>();
    const double rho = type == "ar1" ? c.at("rho").get<double>() : 0.0;
    for (Index r = 0; r < n; ++r)
      for (Index k = 0; k < n; ++k) s(r, k) = r == k ? v : v * std::pow(rho, static_cast<double>(std::abs(r - k)));
  }
  if (block.contains("snr_db")) {
    const double target = signal_power / std::pow(10.0, block.at("snr_db").get<double>() / 10.0);
    s *= target / (s.diagonal().real().mean());
  }
  return s;
}

NoiseModel channel_noise_from_json(const json& block, Index n, double signal_power) {
  const MatrixXd sigma = circular_real_covariance(complex_covariance_from_json(block, n, signal_power));
  if (block.at("family").get<std::string>() == "gaussian") return make_gaussian(sigma);
  const Eigen::LLT<MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("channel noise covariance is not positive definite");
  return make_shaped(base_from_json(block), llt.matrixL());
}

TrainingSequence sequence_from_json(const json& block, Index n, Index m) {
  const std::string kind = block.at("kind").get<std::string>();
  if (kind == "cazac")
    return generate_white_sequence(n, m, WhiteKind::cazac, block.at("seed").get<std::uint64_t>(),
                                   block.at("root").get<Index>())
        .seq;
  if (kind == "random_psk")
    return generate_white_sequence(n, m, WhiteKind::random_psk, block.at("seed").get<std::uint64_t>()).seq;
  if (kind == "all_ones") return TrainingSequence::make(VectorXcd::Ones(n + m - 1), n, m);
  if (kind == "inline") return TrainingSequence::make(complex_vector(block.at("samples")), n, m);
  // Sum of complex tones over k = 1-m .. n-1, scaled to unit power.
  VectorXcd s = VectorXcd::Zero(n + m - 1);
  for (const auto& f : block.at("frequencies"))
    for (Index k = 1 - m; k < n; ++k) s(k + m - 1) += std::polar(1.0, f.get<double>() * static_cast<double>(k));
  const double p = s.squaredNorm() / static_cast<double>(s.size());
  if (!(p > 0.0)) throw std::invalid_argument("tones sequence has zero power");
  return TrainingSequence::make(s / std::sqrt(p), n, m);
}

ChannelSpec channel_from_json(const json& channel, const json& noise) {
  const Index n = channel.at("n").get<Index>(), m = channel.at("m").get<Index>();
  TrainingSequence seq = sequence_from_json(channel.at("sequence"), n, m);
  ChannelParams params{channel.at("omega").get<double>(), complex_vector(channel.at("h"))};
  // Signal power is needed before the noise exists; evaluate with unit noise.
  const ChannelSpec probe(seq, params, make_gaussian(MatrixXd::Identity(2 * n, 2 * n)));
  const double power = signal_mean(probe).squaredNorm() / static_cast<double>(n);
  return ChannelSpec(std::move(seq), std::move(params), channel_noise_from_json(noise, n, power));
}

// ---- experiment runners -----------------------------------------------------

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string matrix_text(const MatrixXd& m) {
  std::string s = "[";
  for (Index r = 0; r < m.rows(); ++r) {
    s += r ? ",[" : "[";
    for (Index c = 0; c < m.cols(); ++c) s += (c ? "," : "") + format_double(m(r, c));
    s += "]";
  }
  return s + "]";
}

std::string diagnostics_text(const InequalityReport& r) {
  std::string s;
  for (const auto& [k, v] : r.diagnostics) s += (s.empty() ? "" : ";") + k + "=" + format_double(v);
  return s;
}

json matrix_json(const MatrixXd& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

json report_json(const InequalityReport& r, const std::string& parameter) {
  json d = json::object();
  for (const auto& [k, v] : r.diagnostics) d[k] = std::isfinite(v) ? json(v) : json(format_double(v));
  return {{"name", r.name},   {"model", r.model},         {"parameter", parameter},
          {"lhs", matrix_json(r.lhs)}, {"rhs", matrix_json(r.rhs)}, {"margin", r.margin},
          {"tolerance", r.tolerance},  {"verdict", to_string(r.verdict)}, {"diagnostics", d}};
}

RunResult run_fim(const json& cfg) {
  RunResult out;
  out.table.columns = {"model", "method", "row", "col", "value", "std_error"};
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto count = cfg.at("count").get<std::size_t>();
  for (const auto& nb : cfg.at("noises")) {
    const NoiseModel model = noise_from_json(nb);
    std::vector<FimEstimate> ests{fim_monte_carlo(model, seed, count)};
    if (auto a = fim_analytic(model)) ests.push_back(*a);
    for (const auto& e : ests)
      for (Index r = 0; r < e.matrix.rows(); ++r)
        for (Index c = 0; c < e.matrix.cols(); ++c)
          out.table.add({model.id(), to_string(e.method), static_cast<std::int64_t>(r), static_cast<std::int64_t>(c),
                         e.matrix(r, c), e.std_error(r, c)});
  }
  return out;
}

RunResult run_inequalities(const json& cfg) {
  RunResult out;
  out.table.columns = {"check", "model", "parameter", "margin", "tolerance", "verdict", "lhs", "rhs", "diagnostics"};
  out.details = json::array();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto count = cfg.at("count").get<std::size_t>();
  const auto knn_count = cfg.at("knn_count").get<std::size_t>();
  CheckOptions opt;
  opt.tolerance_scale = cfg.at("tolerance_scale").get<double>();
  opt.force_knn = cfg.at("force_knn").get<bool>();
  const auto sigma_z = cfg.at("sigma_z").get<std::vector<double>>();
  const auto g_grid = cfg.at("g_grid").get<std::vector<double>>();
  const double t = cfg.at("de_bruijn_t").get<double>();

  auto emit = [&](const InequalityReport& r, const std::string& parameter) {
    out.table.add({r.name, r.model, parameter, r.margin, r.tolerance, to_string(r.verdict), matrix_text(r.lhs),
                   matrix_text(r.rhs), diagnostics_text(r)});
    out.details.push_back(report_json(r, parameter));
    out.reports.push_back(r);
  };
  for (const auto& nb : cfg.at("noises")) {
    const NoiseModel model = noise_from_json(nb);
    const Index n = model.dim();
    for (const auto& c : cfg.at("checks")) {
      const std::string check = c.get<std::string>();
      if (check == "cramer_rao") {
        emit(check_cramer_rao(model, seed, count, opt), "");
      } else if (check == "score_gap_identity") {
        emit(check_score_gap_identity(model, seed, count, opt), "");
      } else if (check == "isoperimetric") {
        emit(check_isoperimetric(model, seed, knn_count, opt), "");
      } else if (check == "worst_additive_noise") {
        for (double s2 : sigma_z)
          emit(check_worst_additive_noise(model, s2 * MatrixXd::Identity(n, n), seed, knn_count, opt),
               "sigma_z2=" + format_double(s2));
      } else if (check == "de_bruijn") {
        emit(check_de_bruijn(model, t, seed, knn_count, opt), "t=" + format_double(t));
      } else if (check == "g_function") {
        emit(check_g_function(model, g_grid, seed, knn_count, opt), "");
      }
    }
  }
  return out;
}

ChannelSpec random_circular_spec(std::uint64_t seed, std::uint64_t index, Index n_max, Index m_max) {
  Substream g(seed, StreamDomain::trial, index);
  std::normal_distribution<double> nd;
  const Index n = 3 + static_cast<Index>(g() % static_cast<std::uint64_t>(n_max - 2));
  const Index m = 1 + static_cast<Index>(g() % static_cast<std::uint64_t>(std::min(m_max, n / 2)));
  VectorXcd s(n + m - 1);
  for (Index k = 0; k < s.size(); ++k) s(k) = std::polar(1.0, 2.0 * std::numbers::pi * g.uniform());
  ChannelParams p;
  p.omega = wrap_angle(2.0 * std::numbers::pi * g.uniform());
  p.h.resize(m);
  for (Index k = 0; k < m; ++k) {
    const double re = nd(g);
    p.h(k) = cplx(re, nd(g));
  }
  MatrixXcd b(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const double re = nd(g);
      b(r, c) = cplx(re, nd(g));
    }
  const MatrixXcd sc = b * b.adjoint() / static_cast<double>(n) + 0.5 * MatrixXcd::Identity(n, n);
  return ChannelSpec(TrainingSequence::make(std::move(s), n, m), std::move(p),
                     make_gaussian(circular_real_covariance(0.5 * (sc + sc.adjoint()))));
}

std::vector<std::string> parameter_names(Index m) {
  std::vector<std::string> names{"omega"};
  for (Index k = 0; k < m; ++k) names.push_back("h_re[" + std::to_string(k) + "]");
  for (Index k = 0; k < m; ++k) names.push_back("h_im[" + std::to_string(k) + "]");
  return names;
}

InequalityReport plain_report(std::string name, std::string model, double margin, double tolerance) {
  InequalityReport r;
  r.name = std::move(name);
  r.model = std::move(model);
  r.margin = margin;
  r.tolerance = tolerance;
  r.verdict = classify(margin, tolerance);
  return r;
}

MatrixXd gaussian_equivalent_fim(const NoiseModel& noise) {
  const MatrixXd& ai = noise.shaping_inverse();
  return symmetrize(ai.transpose() * ai);
}

RunResult run_crlb(const json& cfg) {
  RunResult out;
  out.table.columns = {"record", "name", "parameter", "fim_diag", "crlb", "std_error",
                       "margin", "tolerance", "verdict", "detail"};
  out.details = json::object();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto count = cfg.at("count").get<std::size_t>();
  const double scale = cfg.at("tolerance_scale").get<double>();
  const ChannelSpec spec = channel_from_json(cfg.at("channel"), cfg.at("noise"));
  const auto names = parameter_names(spec.m());
  const MatrixXd sigma = spec.noise.covariance();
  const bool circular = is_circular(sigma, 1e-12);
  const MatrixXd jg = gaussian_equivalent_fim(spec.noise);

  auto emit_route = [&](const std::string& route, const CrlbReport& r) {
    for (Index i = 0; i < r.fim.rows(); ++i)
      out.table.add({"route", route, names[static_cast<std::size_t>(i)], r.fim(i, i),
                     r.singular() ? kNaN : r.crlb(i), r.std_error(i, i), kNaN, kNaN, "",
                     r.singular() ? "singular" : "cond=" + format_double(r.condition_number)});
    out.details[route] = {{"fim", matrix_json(r.fim)},
                          {"std_error", matrix_json(r.std_error)},
                          {"singular", r.singular()},
                          {"nullspace", matrix_json(r.nullspace)}};
  };
  auto emit_check = [&](const InequalityReport& r, const std::string& detail) {
    out.table.add({"check", r.name, "", kNaN, kNaN, kNaN, r.margin, r.tolerance, to_string(r.verdict), detail});
    out.reports.push_back(r);
  };

  std::optional<CrlbReport> complex_form;
  if (circular) {
    complex_form = fim_theta(spec, circular_gaussian_fim(complex_covariance(sigma)));
    emit_route("paper_complex_form", *complex_form);
  }
  const CrlbReport real_form = fim_theta_real(spec, jg);
  emit_route("real_composite_gaussian", real_form);
  const CrlbReport oracle = fim_theta_oracle(spec, seed, count);
  emit_route("oracle", oracle);
  const CrlbReport bounded = lambda_min_bound(jg).fim(spec);
  emit_route("lambda_min_bound", bounded);

  for (const auto& c : cfg.at("checks")) {
    const std::string check = c.get<std::string>();
    if (check == "calibration") {
      const auto& rs = cfg.at("random_specs");
      const auto nspec = rs.at("count").get<std::uint64_t>();
      for (std::uint64_t i = 0; i < nspec; ++i) {
        const ChannelSpec s = random_circular_spec(seed, i, rs.at("n_max").get<Index>(), rs.at("m_max").get<Index>());
        const CrlbReport o = fim_theta_oracle(s, seed, count);
        const CrlbReport f = fim_theta(s, circular_gaussian_fim(complex_covariance(s.noise.covariance())));
        const double gap = (o.fim - f.fim).norm();
        emit_check(plain_report("calibration[" + std::to_string(i) + "]", s.noise.id(), -gap, 3.0 * scale * o.aggregate_stderr()),
                   "n=" + std::to_string(s.n()) + ";m=" + std::to_string(s.m()) +
                       ";relative_gap=" + format_double(gap / f.fim.norm()) +
                       ";relative_stderr=" + format_double(o.aggregate_stderr() / f.fim.norm()));
      }
      // Scale fit on the configured spec when its noise is circular Gaussian.
      if (circular && spec.noise.family() == Family::gaussian) {
        const ScaleCalibration cal = calibrate_complex_scale(spec, seed, count);
        emit_check(plain_report("scale_fit", spec.noise.id(), -std::abs(cal.fitted - kComplexFimScale),
                                kSigmas * scale * cal.fitted_std_error),
                   "fitted=" + format_double(cal.fitted) + ";chosen=" + format_double(cal.scale));
      }
      // Hand-expanded example: n=2, m=1, seq (1,1), omega=0, h=1, unit circular noise.
      const ChannelSpec hand(TrainingSequence::make(VectorXcd::Ones(2), 2, 1), {0.0, VectorXcd::Ones(1)},
                             make_gaussian(circular_real_covariance(MatrixXcd::Identity(2, 2))));
      const CrlbReport hf = fim_theta(hand, MatrixXcd::Identity(2, 2));
      MatrixXd ref(3, 3);
      ref << 1, 0, 1, 0, 2, 0, 1, 0, 2;
      VectorXd ref_crlb(3);
      ref_crlb << 2, 0.5, 1;
      const double err = std::max((hf.fim / hf.fim(0, 0) - ref).cwiseAbs().maxCoeff(),
                                  (hf.crlb / hf.crlb(0) * 2.0 - ref_crlb).cwiseAbs().maxCoeff());
      emit_check(plain_report("hand_example", "n=2,m=1", -err, 1e-9), "fim=" + matrix_text(hf.fim));
    } else if (check == "ordering") {
      if (!complex_form) throw std::invalid_argument("ordering check needs circular noise covariance");
      const double m1 = eigmin(oracle.fim - complex_form->fim);
      emit_check(plain_report("oracle_vs_gaussian", spec.noise.id(), m1, kSigmas * scale * oracle.aggregate_stderr()),
                 "eigmax=" + format_double(eigmax(oracle.fim - complex_form->fim)));
      const LambdaMinBound lb = lambda_min_bound(circular_gaussian_fim(complex_covariance(sigma)));
      const double m2 = eigmin(complex_form->fim - lb.fim(spec).fim);
      emit_check(plain_report("gaussian_vs_lambda_min", spec.noise.id(), m2, 1e-9),
                 "lambda_min=" + format_double(lb.lambda_min));
    } else if (check == "whitening") {
      const ChannelSpec w = whiten(spec);
      const CrlbReport fw = fim_theta_real(w, MatrixXd::Identity(2 * spec.n(), 2 * spec.n()));
      emit_route("whitened", fw);
      if (real_form.singular() || fw.singular()) throw std::runtime_error("whitening check: singular FIM");
      const double rel = ((fw.crlb - real_form.crlb).array() / real_form.crlb.array()).abs().maxCoeff();
      const MatrixXd wm = whitening_matrix(spec);
      const double white_err =
          (wm * sigma * wm.transpose() - MatrixXd::Identity(sigma.rows(), sigma.cols())).cwiseAbs().maxCoeff();
      emit_check(plain_report("whitening_invariance", spec.noise.id(), -rel, 1e-9),
                 "whitened_cov_error=" + format_double(white_err));
    } else if (check == "expected") {
      const CrlbReport e = fim_theta_expected(SequenceDistribution::random_binary(spec.n(), spec.m()), spec, jg,
                                              cfg.at("expected_draws").get<std::size_t>(), seed);
      emit_route("expected_random_binary", e);
      emit_check(plain_report("expected_psd", spec.noise.id(), eigmin(e.fim), 1e-12 * e.fim.norm()),
                 "draws=" + std::to_string(e.sample_count));
    }
  }
  return out;
}

std::string vector_text(const VectorXd& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v(i));
  return s;
}

Knowledge knowledge_of(const std::string& s) {
  if (s == "full_distribution") return Knowledge::full_distribution;
  if (s == "covariance_only") return Knowledge::covariance_only;
  return Knowledge::none;
}

Objective objective_of(const std::string& s) {
  if (s == "max_crlb_entry") return Objective::max_crlb_entry;
  if (s == "min_fim_eigmin") return Objective::min_fim_eigmin;
  return Objective::trace_crlb;
}

RunResult run_design(const json& cfg) {
  RunResult out;
  out.table.columns = {"design", "knowledge", "objective", "rank", "candidate", "status",
                       "objective_value", "whiteness", "crlb_at_worst", "note"};
  out.details = json::array();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  for (const auto& d : cfg.at("designs")) {
    const Index n = d.at("n").get<Index>(), m = d.at("m").get<Index>();
    DesignCriterion crit;
    crit.knowledge = knowledge_of(d.at("knowledge").get<std::string>());
    crit.objective = objective_of(d.at("objective").get<std::string>());
    crit.seed = seed;
    crit.count = d.at("count").get<std::size_t>();
    const NoiseModel noise = channel_noise_from_json(d.at("noise"), n, 1.0);
    const json& g = d.at("grid");
    std::vector<GridPoint> grid;
    const auto omegas = g.at("omegas").get<std::vector<double>>();
    std::vector<VectorXcd> taps;
    if (g.contains("h")) {
      for (const auto& h : g.at("h")) taps.push_back(complex_vector(h));
    } else {
      const auto dg = default_grid(m, g.at("seed").get<std::uint64_t>(), g.at("taps").get<int>());
      for (std::size_t i = 0; i < dg.size() && static_cast<int>(i) < g.at("taps").get<int>(); ++i) taps.push_back(dg[i].h);
    }
    for (double w : omegas)
      for (const auto& h : taps) grid.push_back({w, h});
    std::vector<Candidate> cands;
    std::string notes;
    for (const auto& c : d.at("candidates")) {
      const json& sb = c.at("sequence");
      if (sb.at("kind") == "cazac") {
        const auto gs = generate_white_sequence(n, m, WhiteKind::cazac, sb.at("seed").get<std::uint64_t>(),
                                                sb.at("root").get<Index>());
        if (gs.fallback) notes += c.at("id").get<std::string>() + ": cazac root not coprime, used random_psk; ";
        cands.push_back({c.at("id").get<std::string>(), gs.seq});
      } else {
        cands.push_back({c.at("id").get<std::string>(), sequence_from_json(sb, n, m)});
      }
    }
    const std::string name = d.at("name").get<std::string>();
    const DesignReport rep = compare_designs(cands, crit, grid, noise);
    const std::string kn = to_string(crit.knowledge), ob = to_string(crit.objective);
    json dj = {{"name", name}, {"knowledge", kn}, {"objective", ob}, {"winner", rep.winner}, {"ranked", json::array()},
               {"disqualified", json::array()}};
    for (std::size_t i = 0; i < rep.ranked.size(); ++i) {
      const auto& r = rep.ranked[i];
      out.table.add({name, kn, ob, static_cast<std::int64_t>(i + 1), r.id, i == 0 ? "winner" : "ranked", r.objective,
                     r.whiteness, vector_text(r.crlb), i == 0 ? notes : ""});
      dj["ranked"].push_back({{"id", r.id}, {"objective", r.objective}, {"whiteness", r.whiteness},
                              {"crlb", std::vector<double>(r.crlb.data(), r.crlb.data() + r.crlb.size())}});
    }
    for (const auto& [id, why] : rep.disqualified) {
      double wscore = kNaN;
      for (const auto& c : cands)
        if (c.id == id) wscore = whiteness_score(c.seq);
      out.table.add({name, kn, ob, static_cast<std::int64_t>(0), id, "disqualified", kNaN, wscore, "", why});
      dj["disqualified"].push_back({{"id", id}, {"reason", why}});
    }
    out.details.push_back(dj);
  }
  return out;
}

RunResult run_mse(const json& cfg) {
  RunResult out;
  out.table.columns = {"parameter", "mse", "std_error", "crlb", "ratio", "margin", "tolerance", "verdict", "trials",
                       "failures"};
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const double scale = cfg.at("tolerance_scale").get<double>();
  const ChannelSpec spec = channel_from_json(cfg.at("channel"), cfg.at("noise"));
  EstimatorConfig ec;
  ec.grid_size = cfg.at("estimator").at("grid_size").get<Index>();
  ec.refine_iters = cfg.at("estimator").at("refine_iters").get<int>();
  const MseReport rep =
      mse_monte_carlo(spec, ec, cfg.at("trials").get<std::size_t>(), seed, cfg.at("count").get<std::size_t>());
  const auto names = parameter_names(spec.m());
  for (Index i = 0; i < rep.mse.size(); ++i) {
    const double crlb = rep.crlb.size() ? rep.crlb(i) : kNaN;
    const auto r = plain_report("crlb_dominance[" + names[static_cast<std::size_t>(i)] + "]", spec.noise.id(),
                                rep.mse(i) - crlb, kSigmas * scale * rep.std_error(i));
    out.table.add({names[static_cast<std::size_t>(i)], rep.mse(i), rep.std_error(i), crlb, rep.mse(i) / crlb, r.margin,
                   r.tolerance, to_string(r.verdict), static_cast<std::int64_t>(rep.trials),
                   static_cast<std::int64_t>(rep.failures)});
    out.reports.push_back(r);
  }
  return out;
}

}  // namespace

RunResult run_experiment(const Config& cfg) {
  const json& r = cfg.resolved;
  set_workers(r.at("workers").get<int>());
  switch (cfg.kind()) {
    case ExperimentKind::fim: return run_fim(r);
    case ExperimentKind::inequalities: return run_inequalities(r);
    case ExperimentKind::crlb: return run_crlb(r);
    case ExperimentKind::design: return run_design(r);
    case ExperimentKind::mse: return run_mse(r);
  }
  throw std::logic_error("unreachable");
}

std::string output_path(const Config& cfg) {
  const json& o = cfg.resolved.at("output");
  const std::string p = o.at("path").get<std::string>();
  if (!p.empty()) return p;
  const char* env = std::getenv("CRBKIT_OUT_DIR");
  const std::string dir = env && *env ? env : "crbkit_out";
  std::string name = cfg.resolved.at("name").get<std::string>();
  if (name.empty()) name = cfg.resolved.at("experiment").get<std::string>();
  return (std::filesystem::path(dir) / (name + "." + o.at("format").get<std::string>())).string();
}

std::string echo_path(const std::string& results_path) {
  std::filesystem::path p(results_path);
  p.replace_extension();
  return p.string() + ".resolved.json";
}

namespace {

// The hash identifies the computation, so worker count and destination are left out.
std::uint64_t content_hash(const Config& cfg) {
  Config c = cfg;
  c.resolved.erase("workers");
  c.resolved.erase("output");
  return config_hash(c);
}

}  // namespace

int run_command(const RunRequest& req, std::string& err, std::string* written) {
  try {
    if (req.config_path.has_value() == req.preset.has_value()) throw std::invalid_argument("give exactly one of --config or --preset");
    Config cfg = req.config_path ? load_config(*req.config_path) : load_preset(*req.preset);
    apply_overrides(cfg, req.overrides);
    const RunResult res = run_experiment(cfg);
    Metadata meta{cfg.resolved.at("experiment").get<std::string>(), cfg.resolved.at("name").get<std::string>(),
                  cfg.resolved.at("seed").get<std::uint64_t>(), content_hash(cfg)};
    const std::string path = output_path(cfg);
    const std::string body = cfg.resolved.at("output").at("format") == "json" ? render_json(res.table, meta, res.details)
                                                                              : render_csv(res.table, meta);
    write_atomic(echo_path(path), cfg.resolved.dump(2) + "\n");
    write_atomic(path, body);
    if (written) *written = path;
    return res.violated() ? 2 : 0;
  } catch (const std::exception& e) {
    err = e.what();
    return 1;
  }
}

}  // namespace crbkit
