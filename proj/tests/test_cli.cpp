#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "test_support.hpp"
#include "zadr/format.hpp"
#include "zadr/io.hpp"
#include "zadr/random.hpp"
#include "zadr/simulation.hpp"
#include "zadr_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace zadr;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run zadr_run(std::vector<std::string> args) {
  args.insert(args.begin(), "zadr");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("zadr_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

/// Writes ds and X as a CSV with an id column; returns the path.
fs::path write_data(const std::string& name, const CompositionDataset& ds, const CovariateMatrix& X) {
  const auto path = workdir() / name;
  std::ofstream f(path);
  f << "id";
  for (const auto& c : ds.component_names()) f << ',' << c;
  for (std::size_t k = 1; k < X.columns(); ++k) f << ',' << X.covariate_names()[k];
  f << '\n';
  for (Eigen::Index i = 0; i < ds.values().rows(); ++i) {
    f << "s" << i + 1;
    for (Eigen::Index j = 0; j < ds.values().cols(); ++j) f << ',' << format_real(ds.values()(i, j));
    for (Eigen::Index k = 1; k < X.design().cols(); ++k) f << ',' << format_real(X.design()(i, k));
    f << '\n';
  }
  return path;
}

const fs::path& forams_csv() {
  static const fs::path path = [] {
    Rng rng(2024);
    auto [ds, X] = simulate_dataset(testing::table_truth(), testing::log_depth_design(), 90, 1.0 / 6.0, rng);
    return write_data("forams.csv", ds, X);
  }();
  return path;
}

const std::string kComponents = "Obesa,Pachyderma,Atlantica,Triloba";

Run fit_forams(const fs::path& out, std::vector<std::string> extra = {}, const std::string& ref = "Triloba") {
  std::vector<std::string> args = {"fit",          "--input", forams_csv().string(), "--components", kComponents,
                                   "--covariates", "log_depth", "--ref",            ref,            "--out",
                                   out.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return zadr_run(args);
}

}  // namespace

TEST_CASE("fit writes final and initial models and prints the estimate table") {
  const auto model = workdir() / "fit.json";
  const auto r = fit_forams(model);
  CHECK(r.code == cli::kOk);
  CHECK(fs::exists(model));
  CHECK(fs::exists(workdir() / "fit.initial.json"));
  CHECK(r.out.find("phi") != std::string::npos);
  CHECK(r.out.find("Obesa") != std::string::npos);
  const auto m = io::load_model(model);
  CHECK(m.converged);
  CHECK(m.link.ref_index == 3);
  CHECK(io::load_model(workdir() / "fit.initial.json").stage == FitStage::ZeroFreeInitial);
}

TEST_CASE("fit is byte-identical across runs and the reference accepts an index") {
  const auto a = workdir() / "det_a.json";
  const auto b = workdir() / "det_b.json";
  REQUIRE(fit_forams(a).code == 0);
  REQUIRE(fit_forams(b, {}, "4").code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("fit-predict round trip reproduces fitted values exactly") {
  const auto model = workdir() / "pred.json";
  REQUIRE(fit_forams(model).code == 0);
  const auto out = workdir() / "fitted.csv";
  const auto r = zadr_run({"predict", "--model", model.string(), "--input", forams_csv().string(), "--out", out.string()});
  REQUIRE(r.code == 0);

  const auto m = io::load_model(model);
  const auto X = io::to_covariates(io::read_csv_file(forams_csv()), {"log_depth"});
  const auto fitted = fitted_values(m, X);
  const auto table = io::read_csv_file(out);
  REQUIRE(table.header == m.component_names);
  REQUIRE(table.rows.size() == static_cast<std::size_t>(fitted.values().rows()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.header.size(); ++j)
      CHECK(io::parse_real(table.rows[i][j], "fitted") ==
            fitted.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
}

TEST_CASE("predict with a missing covariate column is a schema error") {
  const auto model = workdir() / "pred.json";
  REQUIRE(fit_forams(model).code == 0);
  const auto bad = workdir() / "nocov.csv";
  std::ofstream(bad) << "depth\n1\n2\n";
  const auto r = zadr_run({"predict", "--model", model.string(), "--input", bad.string()});
  CHECK(r.code == cli::kValidationError);
  CHECK(r.err.find("log_depth") != std::string::npos);
}

TEST_CASE("exit codes for I/O and argument errors") {
  CHECK(zadr_run({"fit", "--input", (workdir() / "absent.csv").string(), "--out", "x.json"}).code == cli::kIoError);
  CHECK(zadr_run({"predict", "--model", (workdir() / "absent.json").string(), "--input", forams_csv().string()}).code ==
        cli::kIoError);
  CHECK(zadr_run({"frobnicate"}).code == cli::kValidationError);
  CHECK(zadr_run({"fit", "--input", forams_csv().string()}).code == cli::kValidationError);
  CHECK(zadr_run({"fit", "--input", forams_csv().string(), "--out", "x.json", "--kind", "weird"}).code ==
        cli::kValidationError);
  CHECK(fit_forams(workdir() / "badref.json", {}, "Nonesuch").code == cli::kValidationError);
  CHECK(zadr_run({"--help"}).code == cli::kOk);
}

TEST_CASE("diagnose rejects B below 19 and writes a result otherwise") {
  const auto model = workdir() / "diag.json";
  REQUIRE(fit_forams(model).code == 0);
  const auto low = zadr_run({"diagnose", "--input", forams_csv().string(), "--model", model.string(), "--B", "5"});
  CHECK(low.code == cli::kValidationError);
  CHECK(low.err.find("B must be") != std::string::npos);

  const auto r =
      zadr_run({"diagnose", "--input", forams_csv().string(), "--model", model.string(), "--B", "19", "--seed", "3"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("p-value") != std::string::npos);
  const auto result = workdir() / "diag.diagnostic.json";
  REQUIRE(fs::exists(result));
  const auto first = slurp(result);
  REQUIRE(zadr_run({"diagnose", "--input", forams_csv().string(), "--model", model.string(), "--B", "19", "--seed",
                    "3"})
              .code == 0);
  CHECK(slurp(result) == first);
}

TEST_CASE("diagnose refits the initial stage when the companion file is missing") {
  const auto model = workdir() / "lonely.json";
  REQUIRE(fit_forams(model).code == 0);
  const auto with_file = workdir() / "with.json";
  REQUIRE(zadr_run({"diagnose", "--input", forams_csv().string(), "--model", model.string(), "--B", "19", "--out",
                    with_file.string()})
              .code == 0);
  fs::remove(workdir() / "lonely.initial.json");
  const auto without = workdir() / "without.json";
  const auto r = zadr_run({"diagnose", "--input", forams_csv().string(), "--model", model.string(), "--B", "19",
                           "--out", without.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("refitting") != std::string::npos);
  CHECK(slurp(with_file) == slurp(without));
}

TEST_CASE("simulate writes the MSE table from the stored training design") {
  const auto model = workdir() / "sim_truth.json";
  REQUIRE(fit_forams(model).code == 0);
  const auto out = workdir() / "mse.csv";
  const auto r = zadr_run({"simulate", "--model", model.string(), "--sizes", "60,90", "--reps", "3", "--seed", "9",
                           "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto table = io::read_csv_file(out);
  CHECK(table.header == std::vector<std::string>{"n", "parameter", "MSE", "successes"});
  CHECK(table.rows.size() == 2 * 7);

  auto m = io::load_model(model);
  m.training_design.resize(0, 0);
  io::save_model(m, workdir() / "no_design.json");
  CHECK(zadr_run({"simulate", "--model", (workdir() / "no_design.json").string(), "--reps", "1"}).code ==
        cli::kValidationError);
}

TEST_CASE("aitchison-ols fits zero-free rows") {
  const auto out = workdir() / "ols.json";
  const auto r = fit_forams(out, {"--kind", "aitchison-ols"});
  CHECK(r.code == 0);
  CHECK(slurp(out).find("aitchison-ols") != std::string::npos);
  CHECK(r.out.find("zero-free rows") != std::string::npos);
}

TEST_CASE("ternary projection") {
  const auto c = cli::ternary_xy(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  CHECK(c.first == doctest::Approx(0.5));
  CHECK(c.second == doctest::Approx(std::sqrt(3.0) / 6.0));
  CHECK(cli::ternary_xy(1, 0, 0) == std::pair<double, double>{0.0, 0.0});
  CHECK(cli::ternary_xy(0, 1, 0) == std::pair<double, double>{1.0, 0.0});
  CHECK(cli::ternary_xy(0, 0, 1).first == 0.5);
  CHECK(cli::ternary_xy(0, 0, 1).second == doctest::Approx(std::sqrt(3.0) / 2.0));
}

TEST_CASE("plot: bar data, ternary data and the three-component rule") {
  const auto model = workdir() / "plot.json";
  REQUIRE(fit_forams(model).code == 0);
  const auto bars = workdir() / "bars.csv";
  const auto svg = workdir() / "bars.svg";
  const auto r = zadr_run({"plot", "--input", forams_csv().string(), "--model", model.string(), "--order-by",
                           "log_depth", "--out", bars.string(), "--svg", svg.string()});
  REQUIRE(r.code == 0);
  const auto table = io::read_csv_file(bars);
  CHECK(table.header.size() == 2 + 4 + 4);
  CHECK(table.rows.size() == 90);
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    CHECK(io::parse_real(table.rows[i - 1][1], "x") <= io::parse_real(table.rows[i][1], "x"));
  CHECK(slurp(svg).rfind("<svg", 0) == 0);

  const auto four = zadr_run({"plot", "--input", forams_csv().string(), "--components", kComponents, "--ternary"});
  CHECK(four.code == cli::kValidationError);

  // Three-part data and model.
  auto truth = testing::table_truth();
  truth.component_names.resize(3);
  truth.B.conservativeResize(2, 2);
  truth.link.ref_index = 2;
  truth.p_hat = Eigen::Vector3d(1.0, 1.0, 0.9);
  Rng rng(5);
  auto [ds, X] = simulate_dataset(truth, testing::log_depth_design(), 40, 0.0, rng);
  const auto three = write_data("three.csv", ds, X);
  const auto three_model = workdir() / "three.json";
  REQUIRE(zadr_run({"fit", "--input", three.string(), "--components", "Obesa,Pachyderma,Atlantica", "--covariates",
                    "log_depth", "--out", three_model.string()})
              .code == 0);
  const auto tern = workdir() / "tern.csv";
  const auto t = zadr_run({"plot", "--input", three.string(), "--model", three_model.string(), "--ternary",
                           "--points", "25", "--out", tern.string(), "--svg", (workdir() / "tern.svg").string()});
  REQUIRE(t.code == 0);
  const auto tt = io::read_csv_file(tern);
  CHECK(tt.rows.size() == 40 + 25);
  for (const auto& row : tt.rows) {
    const double x = io::parse_real(row[3], "x");
    const double y = io::parse_real(row[4], "y");
    CHECK(y >= 0.0);
    CHECK(y <= std::sqrt(3.0) * std::min(x, 1.0 - x) + 1e-12);
  }
}
