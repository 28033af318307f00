#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "zadr/error.hpp"
#include "zadr/io.hpp"

#ifndef ZADR_VERSION_STRING
#define ZADR_VERSION_STRING "0.0.0"
#endif

namespace zadr::io {

using nlohmann::json;

namespace {

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json vec(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(real(v(i)));
  return arr;
}

json row_major(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(real(m(r, c)));
  return arr;
}

Eigen::VectorXd vec_from(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = real_from(arr[i]);
  return v;
}

Eigen::MatrixXd matrix_from(const json& arr, std::size_t rows, std::size_t cols, const char* what) {
  if (arr.size() != rows * cols) throw Error(Errc::SchemaMismatch, std::string(what) + " has the wrong number of entries");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = real_from(arr[k++]);
  return m;
}

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw Error(Errc::SchemaMismatch, std::string("model document lacks '") + key + "'");
  return *it;
}

}  // namespace

std::string library_version() { return ZADR_VERSION_STRING; }

std::string model_to_json(const ZadrModel& m) {
  json doc;
  doc["model_kind"] = std::string(to_string(m.link.model_kind));
  doc["ref_index"] = m.link.ref_index + 1;
  doc["component_names"] = m.component_names;
  doc["covariate_names"] = m.covariate_names;
  doc["B"] = row_major(m.B);
  if (m.link.model_kind == ModelKind::Simple)
    doc["precision"] = {{"phi", real(m.precision(0))}};
  else
    doc["precision"] = {{"gamma", vec(m.precision)}};
  doc["p_hat"] = vec(m.p_hat);
  doc["covariance"] = row_major(m.covariance);
  doc["covariance_pseudo_inverse"] = m.covariance_pseudo_inverse;
  doc["loglik"] = real(m.loglik);
  doc["converged"] = m.converged;
  doc["iterations"] = m.iterations;
  doc["stage"] = std::string(to_string(m.stage));
  doc["seed"] = m.seed;
  doc["zero_mode"] = std::string(to_string(m.zero_mode));
  doc["library_version"] = library_version();
  if (m.training_design.size() > 0) doc["training_design"] = row_major(m.training_design);
  return doc.dump(2) + "\n";
}

ZadrModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    ZadrModel m;
    m.link.model_kind = parse_model_kind(require(doc, "model_kind").get<std::string>());
    const auto ref = require(doc, "ref_index").get<std::size_t>();
    if (ref < 1) throw Error(Errc::SchemaMismatch, "ref_index is 1-based");
    m.link.ref_index = ref - 1;
    m.component_names = require(doc, "component_names").get<std::vector<std::string>>();
    m.covariate_names = require(doc, "covariate_names").get<std::vector<std::string>>();
    if (m.component_names.size() < 2 || m.covariate_names.empty())
      throw Error(Errc::SchemaMismatch, "model needs >= 2 components and >= 1 covariate column");
    const std::size_t d = m.component_names.size() - 1;
    const std::size_t cols = m.covariate_names.size();
    m.B = matrix_from(require(doc, "B"), d, cols, "B");
    const json& prec = require(doc, "precision");
    if (m.link.model_kind == ModelKind::Simple) {
      m.precision = Eigen::VectorXd::Constant(1, real_from(require(prec, "phi")));
    } else {
      m.precision = vec_from(require(prec, "gamma"));
    }
    m.p_hat = vec_from(require(doc, "p_hat"));
    const json& cov = require(doc, "covariance");
    const std::size_t P = m.layout().size();
    m.covariance = cov.empty() ? Eigen::MatrixXd() : matrix_from(cov, P, P, "covariance");
    m.covariance_pseudo_inverse = doc.value("covariance_pseudo_inverse", false);
    m.loglik = real_from(require(doc, "loglik"));
    m.converged = require(doc, "converged").get<bool>();
    m.iterations = doc.value("iterations", 0);
    m.stage = doc.value("stage", std::string("final")) == "zero-free-initial" ? FitStage::ZeroFreeInitial : FitStage::Final;
    m.seed = require(doc, "seed").get<std::uint64_t>();
    m.zero_mode = parse_zero_mode(require(doc, "zero_mode").get<std::string>());
    if (const auto it = doc.find("training_design"); it != doc.end()) {
      if (it->size() % cols != 0) throw Error(Errc::SchemaMismatch, "training_design has the wrong number of entries");
      m.training_design = matrix_from(*it, it->size() / cols, cols, "training_design");
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("malformed model document: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for '" + path.string() + "'");
}

void save_model(const ZadrModel& model, const std::filesystem::path& path) { write_text(path, model_to_json(model)); }

ZadrModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::string diagnostic_to_json(const DiagnosticResult& diag, const ZadrModel& final, const BootstrapResult* bias) {
  json doc;
  doc["model_kind"] = std::string(to_string(final.link.model_kind));
  doc["T"] = real(diag.T);
  doc["delta"] = vec(diag.delta);
  doc["delta_names"] = diag.delta_names;
  doc["sigma2"] = row_major(diag.sigma2);
  doc["sigma2_pseudo_inverse"] = diag.pseudo_inverse;
  doc["pvalue"] = diag.pvalue ? real(*diag.pvalue) : json(nullptr);
  doc["B"] = diag.B_reps;
  doc["failures"] = diag.failures;
  doc["seed"] = diag.seed;
  if (bias) {
    doc["bias"] = {
        {"parameter_names", final.parameter_names()},
        {"bias", vec(bias->bias)},
        {"bias_se", vec(bias->bias_se)},
        {"B", bias->B},
        {"successes", bias->successes},
        {"failures", bias->failures},
        {"seed", bias->master_seed},
    };
  }
  doc["library_version"] = library_version();
  return doc.dump(2) + "\n";
}

std::string simulation_to_json(const SimulationReport& report) {
  json doc;
  doc["sizes"] = report.sizes;
  doc["reps"] = report.reps;
  doc["zero_fraction"] = report.zero_fraction;
  doc["seed"] = report.seed;
  json cells = json::array();
  for (const auto& c : report.cells)
    cells.push_back({{"n", c.n}, {"parameter", c.parameter}, {"mse", real(c.mse)}, {"successes", c.successes}});
  doc["cells"] = cells;
  doc["library_version"] = library_version();
  return doc.dump(2) + "\n";
}

}  // namespace zadr::io
