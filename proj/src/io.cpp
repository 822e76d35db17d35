#include "phasetrap/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phasetrap/errors.hpp"

namespace phasetrap {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return buf;
}

std::string hash_of(const json& j) { return fnv1a_hex(j.dump()); }

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  json data = json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) data.push_back(m.data()[i]);
  out["data"] = std::move(data);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(),
                    j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  require(static_cast<Eigen::Index>(data.size()) == m.size(),
          "matrix payload size mismatch");
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = data[i].get<double>();
  return m;
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tfim1D: return "tfim1d";
    case ModelKind::Tfim2D: return "tfim2d";
    case ModelKind::Essh: return "essh";
    case ModelKind::TEssh: return "t_essh";
  }
  return "?";
}

ModelKind model_kind_from(const std::string& name) {
  if (name == "tfim1d" || name == "tfim1d_periodic") return ModelKind::Tfim1D;
  if (name == "tfim2d") return ModelKind::Tfim2D;
  if (name == "essh") return ModelKind::Essh;
  if (name == "t_essh") return ModelKind::TEssh;
  throw std::invalid_argument("unknown model kind: " + name);
}

const char* noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::AmplitudeDamping: return "amplitude_damping";
    case NoiseKind::LocalDepolarizing: return "local_depolarizing";
  }
  return "?";
}

NoiseKind noise_kind_from(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "amplitude_damping") return NoiseKind::AmplitudeDamping;
  if (name == "local_depolarizing") return NoiseKind::LocalDepolarizing;
  throw std::invalid_argument("unknown noise kind: " + name);
}

}  // namespace

json to_json(const Grid& grid) {
  return json{{"min", grid.g_min}, {"max", grid.g_max}, {"step", grid.step}};
}

Grid grid_from_json(const json& j) {
  Grid grid{j.at("min").get<double>(), j.at("max").get<double>(),
            j.at("step").get<double>()};
  grid.size();  // validates
  return grid;
}

json to_json(const NoiseSpec& spec) {
  return json{{"kind", noise_kind_name(spec.kind)}, {"rate", spec.rate}};
}

NoiseSpec noise_from_json(const json& j) {
  NoiseSpec spec;
  spec.kind = noise_kind_from(j.at("kind").get<std::string>());
  spec.rate = j.value("rate", 0.0);
  spec.validate();
  return spec;
}

json to_json(const HamiltonianSpec& spec) {
  json out{{"kind", model_kind_name(spec.kind)},
           {"n", spec.n},
           {"g", spec.g},
           {"J", spec.J},
           {"boundary", spec.boundary == Boundary::Periodic ? "periodic" : "open"}};
  if (spec.kind == ModelKind::Essh || spec.kind == ModelKind::TEssh)
    out["delta"] = spec.delta;
  if (spec.kind == ModelKind::TEssh) out["h"] = spec.h;
  if (spec.kind == ModelKind::Tfim2D) {
    out["rows"] = spec.rows;
    out["cols"] = spec.cols;
  }
  return out;
}

HamiltonianSpec hamiltonian_from_json(const json& j) {
  HamiltonianSpec spec;
  spec.kind = model_kind_from(j.at("kind").get<std::string>());
  spec.n = j.at("n").get<int>();
  spec.g = j.value("g", 0.0);
  spec.J = j.value("J", 1.0);
  spec.delta = j.value("delta", 0.0);
  spec.h = j.value("h", 0.0);
  spec.rows = j.value("rows", 0);
  spec.cols = j.value("cols", 0);
  std::string boundary = j.value(
      "boundary", spec.kind == ModelKind::Tfim1D ? "periodic" : "open");
  require(boundary == "periodic" || boundary == "open",
          "boundary must be 'open' or 'periodic'");
  spec.boundary = boundary == "periodic" ? Boundary::Periodic : Boundary::Open;
  spec.validate();
  return spec;
}

json to_json(const AnsatzSpec& spec) {
  return json{{"family", family_name(spec.family)},
              {"n", spec.n},
              {"p", spec.p}};
}

AnsatzSpec ansatz_from_json(const json& j) {
  AnsatzSpec spec;
  spec.family = family_from_name(j.at("family").get<std::string>());
  spec.n = j.at("n").get<int>();
  spec.p = j.at("p").get<int>();
  spec.validate();
  return spec;
}

json to_json(const GlobalParams& params) {
  json tables = json::array();
  for (const auto& t : params.coeffs) tables.push_back(matrix_to_json(t));
  return json{{"degree", params.degree},
              {"layers", params.layers},
              {"tables", std::move(tables)}};
}

GlobalParams params_from_json(const json& j) {
  GlobalParams params;
  params.degree = j.at("degree").get<int>();
  params.layers = j.at("layers").get<int>();
  for (const auto& t : j.at("tables")) params.coeffs.push_back(matrix_from_json(t));
  return params;
}

json to_json(const OptResult& result) {
  json out;
  out["ansatz"] = to_json(result.ansatz);
  out["params"] = to_json(result.params);
  out["energy_sum"] = result.energy_sum;
  out["per_g_energies"] = result.per_g_energies;
  out["iterations"] = result.iterations;
  out["converged"] = result.converged;
  out["seed"] = result.seed;
  out["trace"] = result.trace;
  return out;
}

OptResult opt_result_from_json(const json& j) {
  OptResult result;
  result.ansatz = ansatz_from_json(j.at("ansatz"));
  result.params = params_from_json(j.at("params"));
  result.energy_sum = j.at("energy_sum").get<double>();
  result.per_g_energies = j.at("per_g_energies").get<std::vector<double>>();
  result.iterations = j.at("iterations").get<int>();
  result.converged = j.at("converged").get<bool>();
  result.seed = j.at("seed").get<std::uint64_t>();
  result.trace = j.value("trace", std::vector<double>{});
  return result;
}

json to_json(const TableProvenance& provenance) {
  json out;
  using Mode = TableProvenance::Mode;
  out["mode"] = provenance.mode == Mode::Exact   ? "exact"
                : provenance.mode == Mode::Shots ? "shots"
                                                 : "noisy";
  out["source"] = provenance.source == TableProvenance::Source::Ansatz
                      ? "ansatz"
                      : "ground_state";
  if (provenance.mode == Mode::Shots) {
    out["shots"] = provenance.shots;
    out["seed"] = provenance.seed;
  }
  if (provenance.mode == Mode::Noisy) out["noise"] = to_json(provenance.noise);
  return out;
}

TableProvenance provenance_from_json(const json& j) {
  TableProvenance provenance;
  const std::string mode = j.at("mode").get<std::string>();
  using Mode = TableProvenance::Mode;
  if (mode == "exact")
    provenance.mode = Mode::Exact;
  else if (mode == "shots")
    provenance.mode = Mode::Shots;
  else if (mode == "noisy")
    provenance.mode = Mode::Noisy;
  else
    throw std::invalid_argument("unknown table mode: " + mode);
  const std::string source = j.value("source", "ansatz");
  require(source == "ansatz" || source == "ground_state",
          "unknown table source: " + source);
  provenance.source = source == "ansatz" ? TableProvenance::Source::Ansatz
                                         : TableProvenance::Source::GroundState;
  provenance.shots = j.value("shots", 0L);
  provenance.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("noise")) provenance.noise = noise_from_json(j.at("noise"));
  return provenance;
}

json to_json(const FeatureTable& table, const HamiltonianSpec& model) {
  json names = json::array();
  for (const auto& obs : table.set.observables) names.push_back(obs.name());
  json out;
  out["model"] = to_json(model);
  out["set"] = table.set.name;
  out["grid"] = to_json(table.grid);
  out["observables"] = std::move(names);
  out["provenance"] = to_json(table.provenance);
  out["values"] = matrix_to_json(table.values);
  return out;
}

FeatureTable feature_table_from_json(const json& j, HamiltonianSpec* model) {
  HamiltonianSpec spec = hamiltonian_from_json(j.at("model"));
  if (model) *model = spec;
  FeatureTable table;
  table.grid = grid_from_json(j.at("grid"));
  table.set = build_set_by_name(j.at("set").get<std::string>(), spec);
  table.provenance = provenance_from_json(j.at("provenance"));
  table.values = matrix_from_json(j.at("values"));
  require(table.values.rows() == table.grid.size(),
          "feature table row count mismatch");
  require(table.values.cols() == table.set.size(),
          "feature table column count mismatch");
  const auto& names = j.at("observables");
  require(static_cast<int>(names.size()) == table.set.size(),
          "feature table name count mismatch");
  for (int i = 0; i < table.set.size(); ++i)
    require(names[i].get<std::string>() == table.set.observables[i].name(),
            "feature table observable order mismatch");
  return table;
}

json to_json(const LossLandscape& landscape) {
  return json{{"centers", landscape.centers},
              {"raw", landscape.raw},
              {"normalized", landscape.normalized},
              {"smoothed", landscape.smoothed},
              {"regressor", landscape.regressor_tag},
              {"w", landscape.w}};
}

LossLandscape landscape_from_json(const json& j) {
  LossLandscape landscape;
  landscape.centers = j.at("centers").get<std::vector<double>>();
  landscape.raw = j.at("raw").get<std::vector<double>>();
  landscape.normalized = j.at("normalized").get<std::vector<double>>();
  landscape.smoothed = j.at("smoothed").get<std::vector<double>>();
  landscape.regressor_tag = j.at("regressor").get<std::string>();
  landscape.w = j.at("w").get<int>();
  return landscape;
}

json to_json(const Valley& valley) {
  return json{{"center", valley.center},
              {"depth", valley.depth},
              {"width", valley.width},
              {"prominence", valley.prominence},
              {"boundary_suspect", valley.boundary_suspect}};
}

json to_json(const SymmetrizedObservable& op) {
  json terms = json::array();
  for (const auto& t : op.terms)
    terms.push_back(json{{"coeff", t.coeff()}, {"name", t.name()}});
  return json{{"label", op.label}, {"terms", std::move(terms)}};
}

json to_json(const MinedParameter& parameter) {
  return json{{"round", parameter.round},
              {"lambda", parameter.lambda},
              {"g_c", parameter.g_c},
              {"dominant_index", parameter.dominant_index},
              {"order_parameter", to_json(parameter.op)}};
}

json to_json(const ExtrapolationFit& fit) {
  json inputs = json::array();
  for (const auto& [p, g] : fit.inputs) inputs.push_back(json::array({p, g}));
  return json{{"model", fit.model == FitModel::Exponential ? "exponential"
                        : fit.model == FitModel::Power     ? "power"
                                                           : "size"},
              {"g_inf", fit.g_inf},
              {"amplitude", fit.amplitude},
              {"exponent", fit.exponent},
              {"mse", fit.mse},
              {"inputs", std::move(inputs)}};
}

ExtrapolationFit fit_from_json(const json& j) {
  ExtrapolationFit fit;
  const std::string model = j.at("model").get<std::string>();
  fit.model = model == "exponential" ? FitModel::Exponential
              : model == "power"     ? FitModel::Power
                                     : FitModel::Size;
  fit.g_inf = j.at("g_inf").get<double>();
  fit.amplitude = j.at("amplitude").get<double>();
  fit.exponent = j.at("exponent").get<double>();
  fit.mse = j.at("mse").get<double>();
  for (const auto& pair : j.at("inputs"))
    fit.inputs.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  return fit;
}

json to_json(const SetTransformerModel& model) {
  json out;
  out["d_model"] = model.d_model;
  out["heads"] = model.heads;
  out["fc_dim"] = model.fc_dim;
  out["dropout"] = model.dropout_rate;
  out["seed"] = model.seed;
  out["ln_scale"] = vector_to_json(model.ln_scale);
  out["ln_shift"] = vector_to_json(model.ln_shift);
  out["wq"] = matrix_to_json(model.wq);
  out["bq"] = vector_to_json(model.bq);
  out["wk"] = matrix_to_json(model.wk);
  out["bk"] = vector_to_json(model.bk);
  out["wv"] = matrix_to_json(model.wv);
  out["bv"] = vector_to_json(model.bv);
  out["wo"] = matrix_to_json(model.wo);
  out["bo"] = vector_to_json(model.bo);
  out["w1"] = matrix_to_json(model.w1);
  out["b1"] = vector_to_json(model.b1);
  out["w2"] = matrix_to_json(model.w2);
  out["b2"] = model.b2;
  return out;
}

SetTransformerModel st_model_from_json(const json& j) {
  SetTransformerModel model;
  model.d_model = j.at("d_model").get<int>();
  model.heads = j.at("heads").get<int>();
  model.fc_dim = j.at("fc_dim").get<int>();
  model.dropout_rate = j.at("dropout").get<double>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.ln_scale = vector_from_json(j.at("ln_scale"));
  model.ln_shift = vector_from_json(j.at("ln_shift"));
  model.wq = matrix_from_json(j.at("wq"));
  model.bq = vector_from_json(j.at("bq"));
  model.wk = matrix_from_json(j.at("wk"));
  model.bk = vector_from_json(j.at("bk"));
  model.wv = matrix_from_json(j.at("wv"));
  model.bv = vector_from_json(j.at("bv"));
  model.wo = matrix_from_json(j.at("wo"));
  model.bo = vector_from_json(j.at("bo"));
  model.w1 = matrix_from_json(j.at("w1"));
  model.b1 = vector_from_json(j.at("b1"));
  model.w2 = matrix_from_json(j.at("w2"));
  model.b2 = j.at("b2").get<double>();
  return model;
}

// --- CSV ----------------------------------------------------------------------

void write_feature_csv(const FeatureTable& table,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path.string() + " for writing");
  out << "g";
  for (const auto& obs : table.set.observables) out << "," << obs.name();
  out << "\n";
  const auto gs = table.grid.points();
  for (int i = 0; i < table.rows(); ++i) {
    out << format_double(gs[i]);
    for (int j = 0; j < table.set.size(); ++j)
      out << "," << format_double(table.values(i, j));
    out << "\n";
  }
}

Eigen::MatrixXd read_feature_csv(const std::filesystem::path& path,
                                 std::vector<std::string>* names,
                                 std::vector<double>* gs) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  require(!header.empty() && header[0] == "g", "feature CSV must start with g");
  if (names) names->assign(header.begin() + 1, header.end());

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    require(row.size() == header.size(), "ragged CSV row");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd values(rows.size(), header.size() - 1);
  if (gs) gs->clear();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (gs) gs->push_back(rows[i][0]);
    for (std::size_t j = 1; j < rows[i].size(); ++j)
      values(i, j - 1) = rows[i][j];
  }
  return values;
}

void write_landscape_csv(const LossLandscape& landscape,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path.string() + " for writing");
  out << "g_center,raw,normalized,smoothed\n";
  for (std::size_t i = 0; i < landscape.centers.size(); ++i)
    out << format_double(landscape.centers[i]) << ","
        << format_double(landscape.raw[i]) << ","
        << format_double(landscape.normalized[i]) << ","
        << format_double(landscape.smoothed[i]) << "\n";
}

// --- artifacts ------------------------------------------------------------------

void write_artifact(const std::filesystem::path& path, const std::string& kind,
                    const std::string& config_hash, double elapsed_seconds,
                    const json& payload) {
  json out;
  out["schema_version"] = 1;
  out["kind"] = kind;
  out["config_hash"] = config_hash;
  out["elapsed_seconds"] = elapsed_seconds;
  out["payload"] = payload;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  // Write-then-rename so concurrent producers of the same artifact are safe.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream file(tmp);
    require(file.good(), "cannot open " + tmp.string() + " for writing");
    file << out.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

json read_artifact(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream file(path);
  if (!file.good())
    throw missing_artifact_error("missing artifact: " + path.string());
  json parsed = json::parse(file);
  if (parsed.value("kind", "") != kind)
    throw missing_artifact_error("artifact kind mismatch in " + path.string());
  return parsed;
}

bool artifact_current(const std::filesystem::path& path,
                      const std::string& kind, const std::string& config_hash) {
  std::ifstream file(path);
  if (!file.good()) return false;
  json parsed;
  try {
    parsed = json::parse(file);
  } catch (...) {
    return false;
  }
  return parsed.value("kind", "") == kind &&
         parsed.value("config_hash", "") == config_hash;
}

}  // namespace phasetrap
