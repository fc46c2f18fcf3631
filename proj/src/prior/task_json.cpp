#include <stdexcept>

#include "ficbo/prior/task.hpp"

namespace ficbo::prior {

namespace {

using nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols_if_empty) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, cols_if_empty);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("task json: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string_view to_string(PriorKind k) {
  switch (k) {
    case PriorKind::Additive: return "additive";
    case PriorKind::Mixture: return "mixture";
    case PriorKind::Benchmark: return "benchmark";
  }
  return "unknown";
}

std::string_view to_string(SourceMode m) { return m == SourceMode::Direct ? "direct" : "model_based"; }

std::string_view to_string(TargetSignal s) { return s == TargetSignal::Hidden ? "hidden" : "total"; }

PriorKind prior_kind_from_string(std::string_view s) {
  if (s == "additive") return PriorKind::Additive;
  if (s == "mixture") return PriorKind::Mixture;
  if (s == "benchmark") return PriorKind::Benchmark;
  throw std::invalid_argument("unknown prior kind: " + std::string(s));
}

SourceMode source_mode_from_string(std::string_view s) {
  if (s == "direct") return SourceMode::Direct;
  if (s == "model_based") return SourceMode::ModelBased;
  throw std::invalid_argument("unknown source mode: " + std::string(s));
}

TargetSignal target_signal_from_string(std::string_view s) {
  if (s == "hidden") return TargetSignal::Hidden;
  if (s == "total" || s == "true") return TargetSignal::Total;
  throw std::invalid_argument("unknown target signal: " + std::string(s));
}

void VisibilitySplit::validate() const {
  if (d_model < 1) throw std::invalid_argument("VisibilitySplit: d_model must be >= 1");
  if (d_src < 0) throw std::invalid_argument("VisibilitySplit: negative d_src");
  if (overlap < 0 || overlap > d_model) throw std::invalid_argument("VisibilitySplit: overlap out of [0, d_model]");
  if (d_source_visible() < 1) throw std::invalid_argument("VisibilitySplit: source sees no coordinates");
}

Eigen::MatrixXd VisibilitySplit::model_view(const Eigen::MatrixXd& full) const {
  if (full.cols() != d_full()) throw std::invalid_argument("model_view: expected full coordinates");
  return full.leftCols(d_model);
}

Eigen::MatrixXd VisibilitySplit::source_view(const Eigen::MatrixXd& full) const {
  if (full.cols() != d_full()) throw std::invalid_argument("source_view: expected full coordinates");
  return full.rightCols(d_source_visible());
}

Eigen::MatrixXd VisibilitySplit::main_view(const Eigen::MatrixXd& full) const {
  if (full.cols() != d_full()) throw std::invalid_argument("main_view: expected full coordinates");
  return full.leftCols(d_main());
}

void TaskInstance::validate() const {
  const Eigen::Index n = pool_x.rows();
  if (pool_y.size() != n || pool_u.size() != n) throw std::invalid_argument("TaskInstance: pool array sizes differ");
  if (context_init.empty()) throw std::invalid_argument("TaskInstance: empty context");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (std::size_t c : context_init) {
    if (c >= static_cast<std::size_t>(n) || seen[c]) throw std::invalid_argument("TaskInstance: bad context index");
    seen[c] = true;
  }
  if (target_x.rows() != target_y.size() || target_x.rows() != target_u.size())
    throw std::invalid_argument("TaskInstance: target array sizes differ");
  if (target_x.rows() > 0 && target_x.cols() != pool_x.cols())
    throw std::invalid_argument("TaskInstance: target dimension differs from pool");
  if (horizon < 1 || static_cast<std::size_t>(horizon) > candidate_count())
    throw std::invalid_argument("TaskInstance: horizon exceeds the candidate pool");
}

json task_to_json(const TaskInstance& task, bool include_latent) {
  const TaskMetadata& m = task.meta;
  json meta{{"prior", to_string(m.prior)},
            {"name", m.name},
            {"d_model", m.split.d_model},
            {"d_src", m.split.d_src},
            {"overlap", m.split.overlap},
            {"w", m.w},
            {"source_mode", to_string(m.source_mode)},
            {"target_signal", to_string(m.target_signal)},
            {"n_source_points", m.n_source_points},
            {"k_real", m.k_real},
            {"k_decoy", m.k_decoy},
            {"source_weights", m.source_weights},
            {"active_components", m.active_components},
            {"bias", m.bias}};
  json j{{"pool_x", matrix_json(task.pool_x)},
         {"pool_y", vector_json(task.pool_y)},
         {"pool_u", vector_json(task.pool_u)},
         {"context_init", task.context_init},
         {"target_x", matrix_json(task.target_x)},
         {"target_y", vector_json(task.target_y)},
         {"target_u", vector_json(task.target_u)},
         {"horizon", task.horizon},
         {"metadata", std::move(meta)}};
  if (include_latent) {
    const LatentData& l = task.latent;
    j["latent"] = json{{"pool_full", matrix_json(l.pool_full)},
                       {"target_full", matrix_json(l.target_full)},
                       {"pool_clean", vector_json(l.pool_clean)},
                       {"pool_f_model", vector_json(l.pool_f_model)},
                       {"pool_f_src", vector_json(l.pool_f_src)},
                       {"pool_ideal", vector_json(l.pool_ideal)},
                       {"source_inputs", matrix_json(l.source_inputs)},
                       {"source_values", vector_json(l.source_values)}};
  }
  return j;
}

TaskInstance task_from_json(const json& j) {
  TaskInstance t;
  t.pool_x = matrix_from(j.at("pool_x"), 0);
  t.pool_y = vector_from(j.at("pool_y"));
  t.pool_u = vector_from(j.at("pool_u"));
  t.context_init = j.at("context_init").get<std::vector<std::size_t>>();
  t.target_x = matrix_from(j.at("target_x"), t.pool_x.cols());
  t.target_y = vector_from(j.at("target_y"));
  t.target_u = vector_from(j.at("target_u"));
  t.horizon = j.at("horizon").get<int>();
  const json& m = j.at("metadata");
  t.meta.prior = prior_kind_from_string(m.at("prior").get<std::string>());
  t.meta.name = m.value("name", std::string{});
  t.meta.split.d_model = m.at("d_model").get<int>();
  t.meta.split.d_src = m.at("d_src").get<int>();
  t.meta.split.overlap = m.at("overlap").get<int>();
  t.meta.w = m.at("w").get<double>();
  t.meta.source_mode = source_mode_from_string(m.at("source_mode").get<std::string>());
  t.meta.target_signal = target_signal_from_string(m.at("target_signal").get<std::string>());
  t.meta.n_source_points = m.at("n_source_points").get<int>();
  t.meta.k_real = m.at("k_real").get<int>();
  t.meta.k_decoy = m.at("k_decoy").get<int>();
  t.meta.source_weights = m.at("source_weights").get<std::vector<double>>();
  t.meta.active_components = m.at("active_components").get<std::vector<int>>();
  t.meta.bias = m.at("bias").get<bias::BiasRecord>();
  if (j.contains("latent")) {
    const json& l = j.at("latent");
    t.latent.pool_full = matrix_from(l.at("pool_full"), 0);
    t.latent.target_full = matrix_from(l.at("target_full"), t.latent.pool_full.cols());
    t.latent.pool_clean = vector_from(l.at("pool_clean"));
    t.latent.pool_f_model = vector_from(l.at("pool_f_model"));
    t.latent.pool_f_src = vector_from(l.at("pool_f_src"));
    t.latent.pool_ideal = vector_from(l.at("pool_ideal"));
    t.latent.source_inputs = matrix_from(l.at("source_inputs"), 0);
    t.latent.source_values = vector_from(l.at("source_values"));
  }
  t.validate();
  return t;
}

}  // namespace ficbo::prior
