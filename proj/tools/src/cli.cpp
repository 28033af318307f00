#include "zadr_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "zadr/error.hpp"
#include "zadr/format.hpp"
#include "zadr/inference.hpp"
#include "zadr/io.hpp"
#include "zadr/model.hpp"
#include "zadr/simulation.hpp"

namespace zadr::cli {

namespace {

constexpr const char* kIntercept = "(Intercept)";

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Io: return kIoError;
    case Errc::NonFiniteObjective: return kNotConverged;
    default: return kValidationError;
  }
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
}

std::string fixed3(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string est_se(double est, double se) { return fixed3(est) + " (" + fixed3(se) + ")"; }

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string column_label(const std::string& cov) { return cov == kIntercept ? "Constant" : cov; }

std::vector<std::string> raw_covariates(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names)
    if (n != kIntercept) out.push_back(n);
  return out;
}

/// Maps model component names to CSV columns, accepting a "y:" prefix.
std::vector<std::string> resolve_components(const io::CsvTable& table, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (table.find(n)) {
      out.push_back(n);
    } else if (table.find("y:" + n)) {
      out.push_back("y:" + n);
    } else {
      throw Error(Errc::SchemaMismatch, "component column '" + n + "' not found in CSV header");
    }
  }
  return out;
}

io::RegressionData data_for_model(const io::CsvTable& table, const ZadrModel& model) {
  auto data = io::to_regression_data(table, resolve_components(table, model.component_names),
                                     raw_covariates(model.covariate_names));
  if (data.X.covariate_names() != model.covariate_names)
    throw Error(Errc::SchemaMismatch, "covariate names differ from the model");
  if (data.ds.components() != model.D()) throw Error(Errc::SchemaMismatch, "component count differs from the model");
  return data;
}

std::size_t resolve_ref(const std::string& ref, const std::vector<std::string>& names) {
  if (ref.empty()) return 0;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == ref || "y:" + names[i] == ref) return i;
  if (std::all_of(ref.begin(), ref.end(), [](unsigned char c) { return std::isdigit(c); })) {
    const auto idx = std::stoul(ref);
    if (idx >= 1 && idx <= names.size()) return idx - 1;
  }
  throw Error(Errc::InvalidArgument, "reference component '" + ref + "' is not a component name or 1-based index");
}

void print_coefficients(std::ostream& out, const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                        const Eigen::MatrixXd& est, const Eigen::MatrixXd& se) {
  constexpr std::size_t w0 = 14;
  constexpr std::size_t w = 20;
  out << pad("", w0);
  for (const auto& c : cols) out << pad(column_label(c), w);
  out << '\n';
  for (Eigen::Index r = 0; r < est.rows(); ++r) {
    out << pad(rows[static_cast<std::size_t>(r)], w0);
    for (Eigen::Index c = 0; c < est.cols(); ++c)
      out << pad(std::isnan(est(r, c)) ? "" : est_se(est(r, c), se(r, c)), w);
    out << '\n';
  }
}

void print_model(std::ostream& out, const ZadrModel& m, const std::string& title) {
  out << title << ": " << to_string(m.link.model_kind) << " model, reference "
      << m.component_names[m.link.ref_index] << ", zero mode " << to_string(m.zero_mode) << '\n';
  const auto layout = m.layout();
  const Eigen::VectorXd se = m.standard_errors();
  const auto cols = static_cast<Eigen::Index>(layout.cols);
  const auto d = static_cast<Eigen::Index>(layout.d);
  Eigen::MatrixXd est(d + 1, cols);
  Eigen::MatrixXd ses = Eigen::MatrixXd::Constant(d + 1, cols, std::numeric_limits<double>::quiet_NaN());
  est.topRows(d) = m.B;
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) ses(r, c) = se(r * cols + c);
  est.row(d).setConstant(std::numeric_limits<double>::quiet_NaN());
  const Eigen::Index base = d * cols;
  if (m.link.model_kind == ModelKind::Simple) {
    est(d, 0) = m.precision(0);
    ses(d, 0) = se(base);
  } else {
    for (Eigen::Index c = 0; c < cols; ++c) {
      est(d, c) = m.precision(c);
      ses(d, c) = se(base + c);
    }
  }
  auto rows = m.non_reference_names();
  rows.emplace_back(m.link.model_kind == ModelKind::Simple ? "phi" : "gamma");
  print_coefficients(out, rows, m.covariate_names, est, ses);
  out << "log-likelihood " << fixed3(m.loglik) << ", iterations " << m.iterations << ", "
      << (m.converged ? "converged" : "NOT converged") << '\n';
}

int fit_aitchison(const RunConfig& cfg, const io::RegressionData& data, std::size_t ref, std::ostream& out) {
  const auto clean = zero_free_rows(data.ds);
  const auto ds = data.ds.select_rows(clean);
  const auto X = data.X.select_rows(clean);
  const LinkSpec link{ref, ModelKind::Simple};
  const Eigen::MatrixXd B = ols_init(ds, X, link);
  const Eigen::MatrixXd Z = alr(ds, ref);
  const Eigen::MatrixXd resid = Z - X.design() * B.transpose();
  const auto n = static_cast<double>(X.rows());
  const auto k = static_cast<double>(X.columns());
  const double dof = n - k;
  const Eigen::MatrixXd xtx_inv = (X.design().transpose() * X.design()).inverse();
  Eigen::MatrixXd se(B.rows(), B.cols());
  Eigen::MatrixXd resid_cov = resid.transpose() * resid / std::max(dof, 1.0);
  for (Eigen::Index r = 0; r < B.rows(); ++r)
    for (Eigen::Index c = 0; c < B.cols(); ++c)
      se(r, c) = dof > 0.0 ? std::sqrt(resid_cov(r, r) * xtx_inv(c, c)) : std::numeric_limits<double>::quiet_NaN();

  std::vector<std::string> rows;
  for (std::size_t i = 0; i < ds.components(); ++i)
    if (i != ref) rows.push_back(ds.component_names()[i]);
  out << "Aitchison (alr least squares) model on " << X.rows() << " zero-free rows, reference "
      << ds.component_names()[ref] << '\n';
  print_coefficients(out, rows, X.covariate_names(), B, se);

  nlohmann::json doc;
  doc["model_kind"] = "aitchison-ols";
  doc["ref_index"] = ref + 1;
  doc["component_names"] = ds.component_names();
  doc["covariate_names"] = X.covariate_names();
  auto flat = [](const Eigen::MatrixXd& m) {
    std::vector<double> v;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
    return v;
  };
  doc["B"] = flat(B);
  doc["standard_errors"] = dof > 0.0 ? nlohmann::json(flat(se)) : nlohmann::json(nullptr);
  doc["residual_covariance"] = flat(resid_cov);
  doc["rows_used"] = X.rows();
  doc["library_version"] = io::library_version();
  io::write_text(cfg.output_path, doc.dump(2) + "\n");
  return kOk;
}

void write_csv(const std::filesystem::path& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

CovariateMatrix model_design(const ZadrModel& m) {
  if (m.training_design.size() == 0)
    throw Error(Errc::SchemaMismatch, "model has no stored training design; pass --input with covariate columns");
  return CovariateMatrix::from_design(m.training_design, m.covariate_names);
}

// Plot helpers.

struct PlotData {
  CompositionDataset ds;
  CovariateMatrix X;
  std::vector<double> order;
  std::string order_name;
  std::vector<std::size_t> sorted;  // row indices in plotting order
};

const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"};

std::string svg_bars(const PlotData& pd, const CompositionDataset* fitted) {
  const double W = 800.0, H = 400.0, left = 40.0, top = 20.0;
  const auto n = pd.sorted.size();
  const auto D = pd.ds.components();
  const double bw = W / static_cast<double>(n);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + left + 160 << "\" height=\"" << H + top + 40
    << "\">\n";
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = static_cast<Eigen::Index>(pd.sorted[k]);
    double acc = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      const double v = pd.ds.values()(row, static_cast<Eigen::Index>(j));
      if (v <= 0.0) continue;
      s << "<rect x=\"" << left + bw * static_cast<double>(k) << "\" y=\"" << top + H * acc << "\" width=\"" << bw
        << "\" height=\"" << H * v << "\" fill=\"" << kPalette[j % 8] << "\"/>\n";
      acc += v;
    }
  }
  if (fitted) {
    for (std::size_t j = 0; j + 1 < D; ++j) {
      s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < n; ++k) {
        const auto row = static_cast<Eigen::Index>(pd.sorted[k]);
        const double cum = fitted->values().row(row).head(static_cast<Eigen::Index>(j + 1)).sum();
        s << left + bw * (static_cast<double>(k) + 0.5) << ',' << top + H * cum << ' ';
      }
      s << "\"/>\n";
    }
  }
  for (std::size_t j = 0; j < D; ++j)
    s << "<text x=\"" << left + W + 10 << "\" y=\"" << top + 20.0 * static_cast<double>(j + 1) << "\" fill=\""
      << kPalette[j % 8] << "\">" << pd.ds.component_names()[j] << "</text>\n";
  s << "<text x=\"" << left + W / 2 << "\" y=\"" << top + H + 30 << "\">" << pd.order_name << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::string svg_ternary(const std::vector<std::pair<double, double>>& points,
                        const std::vector<std::pair<double, double>>& curve, const std::vector<std::string>& names) {
  const double S = 500.0, pad_px = 40.0;
  auto px = [&](double x) { return pad_px + S * x; };
  auto py = [&](double y) { return pad_px + S * (std::sqrt(3.0) / 2.0 - y); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << S + 2 * pad_px << "\" height=\""
    << S * std::sqrt(3.0) / 2.0 + 2 * pad_px << "\">\n";
  s << "<polygon fill=\"#f4f4f4\" stroke=\"black\" points=\"" << px(0) << ',' << py(0) << ' ' << px(1) << ','
    << py(0) << ' ' << px(0.5) << ',' << py(std::sqrt(3.0) / 2.0) << "\"/>\n";
  s << "<text x=\"" << px(0) - 30 << "\" y=\"" << py(0) + 20 << "\">" << names[0] << "</text>\n";
  s << "<text x=\"" << px(1) - 10 << "\" y=\"" << py(0) + 20 << "\">" << names[1] << "</text>\n";
  s << "<text x=\"" << px(0.5) - 20 << "\" y=\"" << py(std::sqrt(3.0) / 2.0) - 10 << "\">" << names[2]
    << "</text>\n";
  for (const auto& [x, y] : points)
    s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"#d95f02\"/>\n";
  if (!curve.empty()) {
    s << "<polyline fill=\"none\" stroke=\"#1b9e77\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : curve) s << px(x) << ',' << py(y) << ' ';
    s << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

std::filesystem::path initial_model_path(const std::filesystem::path& model_path) {
  auto p = model_path;
  return p.replace_extension(".initial.json");
}

std::pair<double, double> ternary_xy(double y1, double y2, double y3) {
  const double s = y1 + y2 + y3;
  return {(y2 + 0.5 * y3) / s, std::sqrt(3.0) / 2.0 * y3 / s};
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto table = io::read_csv_file(cfg.input_path);
    const auto data = io::to_regression_data(table, cfg.components, cfg.covariates);
    const std::size_t ref = resolve_ref(cfg.ref_component, data.ds.component_names());
    if (cfg.kind == "aitchison-ols") return fit_aitchison(cfg, data, ref, out);

    const LinkSpec link{ref, parse_model_kind(cfg.kind)};
    FitOptions opts;
    opts.zero_mode = parse_zero_mode(cfg.zero_mode);
    opts.random_seed = cfg.seed;
    opts.optimizer.max_iterations = cfg.max_iterations;
    const FitPair pair = fit(data.ds, data.X, link, opts);
    io::save_model(pair.final, cfg.output_path);
    io::save_model(pair.initial, initial_model_path(cfg.output_path));
    print_model(out, pair.final, "Final (zero-adjusted)");
    out << '\n';
    print_model(out, pair.initial, "Initial (zero-free rows)");
    if (!pair.final.converged || !pair.initial.converged) {
      err << "warning: optimizer did not converge; model written with converged=false\n";
      return int{kNotConverged};
    }
    return int{kOk};
  });
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ZadrModel model = io::load_model(cfg.model_path);
    const auto table = io::read_csv_file(cfg.input_path);
    const CovariateMatrix X = io::to_covariates(table, raw_covariates(model.covariate_names));
    if (X.covariate_names() != model.covariate_names)
      throw Error(Errc::SchemaMismatch, "covariate names differ from the model");
    const auto fitted = fitted_values(model, X);
    std::ostringstream s;
    for (std::size_t j = 0; j < model.D(); ++j) s << (j ? "," : "") << csv_quote(model.component_names[j]);
    s << '\n';
    for (Eigen::Index i = 0; i < fitted.values().rows(); ++i) {
      for (Eigen::Index j = 0; j < fitted.values().cols(); ++j) s << (j ? "," : "") << format_real(fitted.values()(i, j));
      s << '\n';
    }
    write_csv(cfg.output_path, s.str(), out);
    return int{kOk};
  });
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.bootstrap_B < kMinBootstrapReplicates) {
    err << "error: B must be \xE2\x89\xA5 " << kMinBootstrapReplicates << '\n';
    return kValidationError;
  }
  return guarded(err, [&] {
    const ZadrModel final = io::load_model(cfg.model_path);
    const auto table = io::read_csv_file(cfg.input_path);
    const auto data = data_for_model(table, final);

    FitOptions opts;
    opts.zero_mode = final.zero_mode;
    opts.random_seed = final.seed;
    opts.optimizer.max_iterations = cfg.max_iterations;
    const auto initial_path = cfg.initial_path.empty() ? initial_model_path(cfg.model_path) : cfg.initial_path;
    ZadrModel initial;
    if (std::filesystem::exists(initial_path)) {
      initial = io::load_model(initial_path);
    } else {
      out << "no initial model at " << initial_path.string() << "; refitting the zero-free stage\n";
      initial = fit(data.ds, data.X, final.link, opts).initial;
    }

    DiagnosticResult diag = diagnostic_T(initial, final);
    const BootstrapResult boot = bootstrap_pvalue(final, diag.T, data.ds, data.X, cfg.bootstrap_B, cfg.seed, opts);
    diag.pvalue = boot.pvalue;
    diag.B_reps = boot.B;
    diag.failures = boot.failures;
    diag.seed = cfg.seed;

    std::optional<BootstrapResult> bias;
    if (cfg.bias) bias = bootstrap_bias(final, data.ds, data.X, cfg.bootstrap_B, cfg.seed, opts);

    out << "T " << format_real(diag.T) << '\n';
    out << "B " << boot.B << " (successes " << boot.successes << ", failures " << boot.failures << ")\n";
    out << "p-value " << format_real(boot.pvalue) << '\n';
    if (diag.pseudo_inverse) out << "note: combined covariance was ill-conditioned; pseudo-inverse used\n";
    if (bias) {
      out << '\n' << pad("parameter", 28) << pad("estimate", 12) << pad("bias", 12) << "bias se\n";
      const auto names = final.parameter_names();
      const Eigen::VectorXd est = final.parameters();
      for (std::size_t k = 0; k < names.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out << pad(names[k], 28) << pad(fixed3(est(i)), 12) << pad(fixed3(bias->bias(i)), 12)
            << fixed3(bias->bias_se(i)) << '\n';
      }
    }
    auto path = cfg.output_path;
    if (path.empty()) path = std::filesystem::path(cfg.model_path).replace_extension(".diagnostic.json");
    io::write_text(path, io::diagnostic_to_json(diag, final, bias ? &*bias : nullptr));
    return int{kOk};
  });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ZadrModel truth = io::load_model(cfg.model_path);
    CovariateMatrix base = cfg.input_path.empty()
                               ? model_design(truth)
                               : io::to_covariates(io::read_csv_file(cfg.input_path), raw_covariates(truth.covariate_names));
    if (base.covariate_names() != truth.covariate_names)
      throw Error(Errc::SchemaMismatch, "covariate names differ from the model");
    std::vector<std::size_t> sizes = cfg.sizes;
    if (sizes.empty()) sizes = {60, 120, 240, 360, 480, 600};
    FitOptions opts;
    opts.optimizer.max_iterations = cfg.max_iterations;
    const SimulationReport report =
        run_simulation_study(truth, base, sizes, cfg.reps, cfg.zero_fraction, cfg.seed, opts);
    std::ostringstream csv;
    write_simulation_csv(report, csv);
    write_csv(cfg.output_path, csv.str(), out);

    if (!cfg.output_path.empty()) {
      out << pad("parameter", 28);
      for (auto n : sizes) out << pad("n=" + std::to_string(n), 12);
      out << '\n';
      for (std::size_t k = 0; k < report.parameter_names.size(); ++k) {
        out << pad(report.parameter_names[k], 28);
        for (std::size_t s = 0; s < sizes.size(); ++s) out << pad(fixed3(report.cell(s, k).mse), 12);
        out << '\n';
      }
    }
    return int{kOk};
  });
}

int cmd_plot(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto table = io::read_csv_file(cfg.input_path);
    std::optional<ZadrModel> model;
    if (!cfg.model_path.empty()) model = io::load_model(cfg.model_path);
    const auto data = model && cfg.components.empty() ? data_for_model(table, *model)
                                                      : io::to_regression_data(table, cfg.components, cfg.covariates);
    const auto& names = data.ds.component_names();
    const auto D = data.ds.components();
    if (cfg.ternary && D != 3)
      throw Error(Errc::TernaryRequiresThree, "ternary plots need exactly three components, got " + std::to_string(D));

    PlotData pd{data.ds, data.X, {}, cfg.order_by, {}};
    const auto n = data.ds.rows();
    if (pd.order_name.empty() && data.X.p() > 0) pd.order_name = data.X.covariate_names()[1];
    if (pd.order_name.empty()) {
      pd.order_name = "row";
      for (std::size_t i = 0; i < n; ++i) pd.order.push_back(static_cast<double>(i + 1));
    } else {
      const auto col = table.find(pd.order_name);
      if (!col) throw Error(Errc::SchemaMismatch, "order-by column '" + pd.order_name + "' not found in CSV header");
      for (std::size_t i = 0; i < n; ++i) pd.order.push_back(io::parse_real(table.rows[i][*col], pd.order_name));
    }
    pd.sorted.resize(n);
    std::iota(pd.sorted.begin(), pd.sorted.end(), std::size_t{0});
    std::stable_sort(pd.sorted.begin(), pd.sorted.end(), [&](auto a, auto b) { return pd.order[a] < pd.order[b]; });

    std::optional<CompositionDataset> fitted;
    if (model) fitted = fitted_values(*model, data.X);

    std::ostringstream csv;
    if (!cfg.ternary) {
      csv << "id," << csv_quote(pd.order_name);
      for (const auto& c : names) csv << ',' << csv_quote(c);
      if (fitted)
        for (const auto& c : names) csv << ',' << csv_quote("fitted:" + c);
      csv << '\n';
      for (auto i : pd.sorted) {
        const auto r = static_cast<Eigen::Index>(i);
        csv << csv_quote(data.ds.row_ids()[i]) << ',' << format_real(pd.order[i]);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(D); ++j) csv << ',' << format_real(data.ds.values()(r, j));
        if (fitted)
          for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(D); ++j)
            csv << ',' << format_real(fitted->values()(r, j));
        csv << '\n';
      }
      if (!cfg.svg_path.empty()) io::write_text(cfg.svg_path, svg_bars(pd, fitted ? &*fitted : nullptr));
    } else {
      std::vector<std::pair<double, double>> points, curve;
      csv << "kind,id," << csv_quote(pd.order_name) << ",x,y\n";
      for (auto i : pd.sorted) {
        const auto r = static_cast<Eigen::Index>(i);
        const auto xy = ternary_xy(data.ds.values()(r, 0), data.ds.values()(r, 1), data.ds.values()(r, 2));
        points.push_back(xy);
        csv << "observed," << csv_quote(data.ds.row_ids()[i]) << ',' << format_real(pd.order[i]) << ','
            << format_real(xy.first) << ',' << format_real(xy.second) << '\n';
      }
      if (model) {
        // Sweep one covariate over its observed range, others at their means.
        const Eigen::MatrixXd& design = data.X.design();
        Eigen::Index sweep = 1;
        for (Eigen::Index c = 1; c < design.cols(); ++c)
          if (data.X.covariate_names()[static_cast<std::size_t>(c)] == pd.order_name) sweep = c;
        if (design.cols() > 1) {
          const Eigen::RowVectorXd mean = design.colwise().mean();
          const double lo = design.col(sweep).minCoeff();
          const double hi = design.col(sweep).maxCoeff();
          const std::size_t m = std::max<std::size_t>(cfg.curve_points, 2);
          for (std::size_t k = 0; k < m; ++k) {
            Eigen::RowVectorXd x = mean;
            x(sweep) = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
            const Eigen::VectorXd a = link_alpha(x, model->B, model->link.ref_index);
            const auto xy = ternary_xy(a(0), a(1), a(2));
            curve.push_back(xy);
            csv << "fitted,curve" << k + 1 << ',' << format_real(x(sweep)) << ',' << format_real(xy.first) << ','
                << format_real(xy.second) << '\n';
          }
        }
      }
      if (!cfg.svg_path.empty()) io::write_text(cfg.svg_path, svg_ternary(points, curve, names));
    }
    write_csv(cfg.output_path, csv.str(), out);
    return int{kOk};
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-adjusted Dirichlet regression"};
  app.set_version_flag("--version", io::library_version());
  app.require_subcommand(1);
  RunConfig cfg;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a simple or mixed ZADR model");
  fit_cmd->add_option("-i,--input", cfg.input_path, "CSV with compositions and covariates")->required();
  fit_cmd->add_option("-o,--out", cfg.output_path, "Model file (JSON)")->required();
  fit_cmd->add_option("--components", cfg.components, "Composition columns (default: columns prefixed y:)")
      ->delimiter(',');
  fit_cmd->add_option("--covariates", cfg.covariates, "Covariate columns (default: remaining numeric columns)")
      ->delimiter(',');
  fit_cmd->add_option("--kind", cfg.kind, "simple, mixed or aitchison-ols")
      ->check(CLI::IsMember({"simple", "mixed", "aitchison-ols"}));
  fit_cmd->add_option("--ref", cfg.ref_component, "Reference component (name or 1-based index)");
  fit_cmd->add_option("--zero-mode", cfg.zero_mode, "renormalized or as-written")
      ->check(CLI::IsMember({"renormalized", "as-written"}));
  fit_cmd->add_option("--seed", cfg.seed, "Seed for the mixed-model start");
  fit_cmd->add_option("--max-iter", cfg.max_iterations, "Optimizer iteration cap")->check(CLI::PositiveNumber);

  auto* predict_cmd = app.add_subcommand("predict", "Fitted compositions for new covariates");
  predict_cmd->add_option("-m,--model", cfg.model_path)->required();
  predict_cmd->add_option("-i,--input", cfg.input_path, "CSV with the model's covariate columns")->required();
  predict_cmd->add_option("-o,--out", cfg.output_path, "Output CSV (default: stdout)");

  auto* diagnose_cmd = app.add_subcommand("diagnose", "Zero-effect diagnostic with bootstrap p-value");
  diagnose_cmd->add_option("-i,--input", cfg.input_path)->required();
  diagnose_cmd->add_option("-m,--model", cfg.model_path, "Final model")->required();
  diagnose_cmd->add_option("--initial", cfg.initial_path, "Initial model (default: <model>.initial.json)");
  diagnose_cmd->add_option("--B", cfg.bootstrap_B, "Bootstrap replicates (>= 19)");
  diagnose_cmd->add_option("--seed", cfg.seed);
  diagnose_cmd->add_flag("--bias", cfg.bias, "Also estimate parameter bias");
  diagnose_cmd->add_option("-o,--out", cfg.output_path, "Result file (default: <model>.diagnostic.json)");
  diagnose_cmd->add_option("--max-iter", cfg.max_iterations)->check(CLI::PositiveNumber);

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo MSE study from a model");
  simulate_cmd->add_option("-m,--model", cfg.model_path, "Truth model")->required();
  simulate_cmd->add_option("--sizes", cfg.sizes, "Sample sizes")->delimiter(',');
  simulate_cmd->add_option("--reps", cfg.reps)->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--zero-fraction", cfg.zero_fraction)->check(CLI::Range(0.0, 0.999999));
  simulate_cmd->add_option("--seed", cfg.seed);
  simulate_cmd->add_option("-i,--input", cfg.input_path, "Design CSV (default: the model's training design)");
  simulate_cmd->add_option("-o,--out", cfg.output_path, "MSE CSV (default: stdout)");
  simulate_cmd->add_option("--max-iter", cfg.max_iterations)->check(CLI::PositiveNumber);

  auto* plot_cmd = app.add_subcommand("plot", "Bar-plot or ternary plot data");
  plot_cmd->add_option("-i,--input", cfg.input_path)->required();
  plot_cmd->add_option("-m,--model", cfg.model_path, "Model for fitted overlays");
  plot_cmd->add_option("--components", cfg.components)->delimiter(',');
  plot_cmd->add_option("--covariates", cfg.covariates)->delimiter(',');
  plot_cmd->add_option("--order-by", cfg.order_by, "Covariate column ordering the bars");
  plot_cmd->add_flag("--ternary", cfg.ternary, "Ternary coordinates (three components only)");
  plot_cmd->add_option("--svg", cfg.svg_path, "Also render an SVG");
  plot_cmd->add_option("--points", cfg.curve_points, "Points on the fitted curve")->check(CLI::PositiveNumber);
  plot_cmd->add_option("-o,--out", cfg.output_path, "Output CSV (default: stdout)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  if (fit_cmd->parsed()) return cmd_fit(cfg, out, err);
  if (predict_cmd->parsed()) return cmd_predict(cfg, out, err);
  if (diagnose_cmd->parsed()) return cmd_diagnose(cfg, out, err);
  if (simulate_cmd->parsed()) return cmd_simulate(cfg, out, err);
  return cmd_plot(cfg, out, err);
}

}  // namespace zadr::cli
