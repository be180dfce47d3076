#include "sarange/sarange.h"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "sarange/anneal.hpp"
#include "sarange/dataset.hpp"
#include "sarange/error.hpp"
#include "sarange/objectives.hpp"
#include "sarange/range.hpp"
#include "sarange/report.hpp"
#include "sarange/resnet.hpp"
#include "sarange/trainer.hpp"

using namespace sarange;

struct sar_domain {
  BoxDomain value;
};
struct sar_objective {
  Objective value;
};
struct sar_dataset {
  Dataset value;
};
struct sar_resnet {
  ResNet value;
};
struct sar_anneal_result {
  AnnealResult value;
  AnnealConfig cfg;
  BoxDomain domain;
};
struct sar_range_result {
  RangeResult value;
  AnnealConfig cfg;
  BoxDomain domain;
};
struct sar_oracle_result {
  OracleResult value;
  BoxDomain domain;
};

namespace {

thread_local std::string last_error;

sar_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return SAR_ERR_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch: return SAR_ERR_DIMENSION;
    case ErrorCode::numerical: return SAR_ERR_NUMERICAL;
    case ErrorCode::parse: return SAR_ERR_PARSE;
    case ErrorCode::io: return SAR_ERR_IO;
    case ErrorCode::budget_exceeded: return SAR_ERR_BUDGET;
  }
  return SAR_ERR_INTERNAL;
}

template <typename Body>
sar_status guarded(Body&& body) noexcept {
  try {
    body();
    return SAR_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SAR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SAR_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return SAR_ERR_INTERNAL;
  }
}

template <typename T>
const T& deref(const T* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::invalid_argument, std::string(what) + " is NULL");
  return *p;
}

template <typename T>
T& deref(T* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::invalid_argument, std::string(what) + " is NULL");
  return *p;
}

const char* cstr(const char* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::invalid_argument, std::string(what) + " is NULL");
  return p;
}

void check_out(const void* p) {
  if (p == nullptr) throw Error(ErrorCode::invalid_argument, "output pointer is NULL");
}

std::span<const double> input_span(const double* p, std::size_t n) {
  if (p == nullptr && n != 0) throw Error(ErrorCode::invalid_argument, "input array is NULL");
  return {p, n};
}

void copy_point(const Point& src, double* dst, std::size_t dim) {
  require_dimension(src.size(), dim, "point buffer");
  check_out(dst);
  std::copy(src.begin(), src.end(), dst);
}

void copy_text(const std::string& text, char* buf, std::size_t cap,
               std::size_t* len) {
  check_out(len);
  *len = text.size();
  if (buf != nullptr && cap > 0) {
    const auto n = std::min(cap - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
}

AnnealConfig from_c(const sar_anneal_config& c) {
  AnnealConfig cfg;
  cfg.t_max = c.t_max;
  cfg.t_min = c.t_min;
  cfg.delta = c.delta;
  cfg.inner_iters = c.inner_iters;
  cfg.proposal_variance = c.proposal_variance;
  cfg.seed = c.seed;
  if (c.mode != SAR_MODE_REFLECTED && c.mode != SAR_MODE_CLASSICAL) {
    throw Error(ErrorCode::invalid_argument, "unknown anneal mode");
  }
  if (c.cooling != SAR_COOLING_THEOREM && c.cooling != SAR_COOLING_ALGORITHM1) {
    throw Error(ErrorCode::invalid_argument, "unknown cooling schedule");
  }
  cfg.mode = c.mode == SAR_MODE_REFLECTED ? Mode::reflected : Mode::classical;
  cfg.cooling = c.cooling == SAR_COOLING_THEOREM ? Cooling::theorem : Cooling::algorithm1;
  cfg.validate();
  return cfg;
}

TrainConfig from_c(const sar_train_config& c) {
  TrainConfig cfg;
  cfg.learning_rate = c.learning_rate;
  cfg.epochs = c.epochs;
  cfg.batch_size = c.batch_size;
  cfg.adam_beta1 = c.adam_beta1;
  cfg.adam_beta2 = c.adam_beta2;
  cfg.adam_epsilon = c.adam_epsilon;
  cfg.seed = c.seed;
  return cfg;
}

}  // namespace

extern "C" {

const char* sar_version(void) { return "0.1.0"; }

const char* sar_last_error(void) { return last_error.c_str(); }

const char* sar_status_name(sar_status status) {
  switch (status) {
    case SAR_OK: return "ok";
    case SAR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SAR_ERR_DIMENSION: return "dimension mismatch";
    case SAR_ERR_NUMERICAL: return "numerical error";
    case SAR_ERR_PARSE: return "parse error";
    case SAR_ERR_IO: return "i/o error";
    case SAR_ERR_BUDGET: return "budget exceeded";
    case SAR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- domain ----------------------------------------------------------------

sar_status sar_domain_create(const double* bounds, size_t dim, sar_domain** out) {
  return guarded([&] {
    check_out(out);
    require(dim >= 1, "domain dimension must be at least 1");
    *out = new sar_domain{BoxDomain::from_flat(input_span(bounds, 2 * dim))};
  });
}

void sar_domain_destroy(sar_domain* domain) { delete domain; }

size_t sar_domain_dim(const sar_domain* domain) {
  return domain ? domain->value.dim() : 0;
}

sar_status sar_domain_bounds(const sar_domain* domain, double* bounds) {
  return guarded([&] {
    const auto& d = deref(domain, "domain").value;
    check_out(bounds);
    for (std::size_t j = 0; j < d.dim(); ++j) {
      bounds[2 * j] = d[j].low;
      bounds[2 * j + 1] = d[j].high;
    }
  });
}

sar_status sar_domain_contains(const sar_domain* domain, const double* p,
                               size_t dim, int* inside) {
  return guarded([&] {
    check_out(inside);
    *inside = contains(deref(domain, "domain").value, input_span(p, dim)) ? 1 : 0;
  });
}

sar_status sar_domain_reflect(const sar_domain* domain, const double* y,
                              size_t dim, double* out) {
  return guarded([&] {
    const auto r = reflect(deref(domain, "domain").value, input_span(y, dim));
    copy_point(r, out, dim);
  });
}

// ---- objectives ------------------------------------------------------------

sar_status sar_objective_builtin(const char* name, sar_objective** out) {
  return guarded([&] {
    check_out(out);
    *out = new sar_objective{builtin_objective(cstr(name, "name"))};
  });
}

sar_status sar_objective_from_resnet(const sar_resnet* net, sar_objective** out) {
  return guarded([&] {
    check_out(out);
    auto copy = std::make_shared<const ResNet>(deref(net, "net").value);
    *out = new sar_objective{make_objective(std::move(copy))};
  });
}

void sar_objective_destroy(sar_objective* objective) { delete objective; }

size_t sar_objective_dim(const sar_objective* objective) {
  return objective ? objective->value.dim() : 0;
}

sar_status sar_objective_eval(const sar_objective* objective, const double* x,
                              size_t dim, double* out) {
  return guarded([&] {
    check_out(out);
    *out = deref(objective, "objective").value(input_span(x, dim));
  });
}

const char* sar_builtin_names(void) {
  static const std::string joined = [] {
    std::string s;
    for (const auto& n : builtin_names()) s += (s.empty() ? "" : " ") + n;
    return s;
  }();
  return joined.c_str();
}

sar_status sar_builtin_domain(const char* name, sar_domain** out) {
  return guarded([&] {
    check_out(out);
    *out = new sar_domain{builtin_domain(cstr(name, "name"))};
  });
}

// ---- datasets --------------------------------------------------------------

sar_status sar_dataset_sample(const sar_objective* objective,
                              const sar_domain* domain, size_t m,
                              double noise_sd, uint64_t seed, sar_dataset** out) {
  return guarded([&] {
    check_out(out);
    *out = new sar_dataset{sample_dataset(deref(objective, "objective").value,
                                          deref(domain, "domain").value, m,
                                          noise_sd, seed)};
  });
}

sar_status sar_dataset_load(const char* csv_path, const char* meta_path,
                            sar_dataset** out) {
  return guarded([&] {
    check_out(out);
    Dataset data = read_dataset_csv(cstr(csv_path, "csv_path"));
    if (meta_path != nullptr) {
      const std::string text = read_text_file(meta_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse, std::string(meta_path) + ": malformed JSON at byte " +
                                          std::to_string(e.byte));
      }
      data.meta = dataset_meta_from_json(j);
      if (data.meta.domain) {
        require_dimension(data.meta.domain->dim(), data.dim, "dataset metadata domain");
      }
    }
    *out = new sar_dataset{std::move(data)};
  });
}

sar_status sar_dataset_write_csv(const sar_dataset* data, const char* path) {
  return guarded([&] {
    write_dataset_csv(deref(data, "data").value, cstr(path, "path"));
  });
}

sar_status sar_dataset_metadata_json(const sar_dataset* data, char* buf,
                                     size_t cap, size_t* len) {
  return guarded([&] {
    const auto& d = deref(data, "data").value;
    copy_text(to_json(d.meta, d.size(), d.dim).dump(2), buf, cap, len);
  });
}

void sar_dataset_destroy(sar_dataset* data) { delete data; }

size_t sar_dataset_rows(const sar_dataset* data) {
  return data ? data->value.size() : 0;
}

size_t sar_dataset_dim(const sar_dataset* data) { return data ? data->value.dim : 0; }

// ---- residual networks -----------------------------------------------------

sar_status sar_resnet_architecture(const char* preset, size_t width_divisor,
                                   uint64_t init_seed, sar_resnet** out) {
  return guarded([&] {
    check_out(out);
    *out = new sar_resnet{
        architecture(cstr(preset, "preset"), init_seed, width_divisor)};
  });
}

sar_status sar_resnet_load(const char* path, sar_resnet** out) {
  return guarded([&] {
    check_out(out);
    *out = new sar_resnet{load_weights(cstr(path, "path"))};
  });
}

sar_status sar_resnet_save(const sar_resnet* net, const char* path) {
  return guarded([&] {
    save_weights(deref(net, "net").value, cstr(path, "path"));
  });
}

void sar_resnet_destroy(sar_resnet* net) { delete net; }

size_t sar_resnet_input_dim(const sar_resnet* net) {
  return net ? net->value.input_dim() : 0;
}

size_t sar_resnet_parameter_count(const sar_resnet* net) {
  return net ? net->value.parameter_count() : 0;
}

sar_status sar_resnet_forward(const sar_resnet* net, const double* x, size_t dim,
                              double* out) {
  return guarded([&] {
    check_out(out);
    *out = deref(net, "net").value.forward(input_span(x, dim));
  });
}

// ---- training --------------------------------------------------------------

void sar_train_config_default(sar_train_config* cfg) {
  if (cfg == nullptr) return;
  const TrainConfig d;
  cfg->learning_rate = d.learning_rate;
  cfg->epochs = static_cast<uint32_t>(d.epochs);
  cfg->batch_size = static_cast<uint32_t>(d.batch_size);
  cfg->adam_beta1 = d.adam_beta1;
  cfg->adam_beta2 = d.adam_beta2;
  cfg->adam_epsilon = d.adam_epsilon;
  cfg->seed = d.seed;
}

sar_status sar_train(sar_resnet* net, const sar_dataset* data,
                     const sar_train_config* cfg, double* loss_history,
                     double* final_mse, sar_progress_fn progress, void* user) {
  return guarded([&] {
    const TrainConfig config = from_c(deref(cfg, "cfg"));
    TrainProgress cb;
    if (progress != nullptr) {
      cb = [progress, user](std::size_t epoch, double loss) {
        progress(static_cast<uint32_t>(epoch), loss, user);
      };
    }
    const auto result =
        train(deref(net, "net").value, deref(data, "data").value, config, cb);
    if (loss_history != nullptr) {
      std::copy(result.loss_history.begin(), result.loss_history.end(), loss_history);
    }
    if (final_mse != nullptr) *final_mse = result.final_mse;
  });
}

sar_status sar_evaluate_fit(const sar_resnet* net, const sar_objective* objective,
                            const sar_domain* eval_domain, size_t n,
                            uint64_t seed, sar_fit_report* out) {
  return guarded([&] {
    check_out(out);
    const auto report = evaluate_fit(deref(net, "net").value,
                                     deref(objective, "objective").value,
                                     deref(eval_domain, "eval_domain").value, n, seed);
    *out = sar_fit_report{report.mae, report.mse, report.n_eval_points,
                          report.eval_seed};
  });
}

sar_status sar_fit_report_json(const sar_fit_report* report,
                               const sar_domain* eval_domain, char* buf,
                               size_t cap, size_t* len) {
  return guarded([&] {
    const auto& r = deref(report, "report");
    const FitReport full{r.mae, r.mse, r.n_eval_points,
                         deref(eval_domain, "eval_domain").value, r.eval_seed};
    copy_text(to_json(full).dump(2), buf, cap, len);
  });
}

// ---- annealing -------------------------------------------------------------

void sar_anneal_config_default(sar_anneal_config* cfg) {
  if (cfg == nullptr) return;
  const AnnealConfig d;
  cfg->t_max = d.t_max;
  cfg->t_min = d.t_min;
  cfg->delta = d.delta;
  cfg->inner_iters = static_cast<uint32_t>(d.inner_iters);
  cfg->proposal_variance = d.proposal_variance;
  cfg->seed = d.seed;
  cfg->mode = SAR_MODE_REFLECTED;
  cfg->cooling = SAR_COOLING_THEOREM;
}

double sar_acceptance_probability(double delta_f, double temperature) {
  if (!(temperature > 0.0)) return -1.0;
  return acceptance_probability(delta_f, temperature);
}

sar_status sar_anneal_run(const sar_objective* objective, const sar_domain* domain,
                          const sar_anneal_config* cfg, sar_anneal_result** out) {
  return guarded([&] {
    check_out(out);
    const AnnealConfig config = from_c(deref(cfg, "cfg"));
    const auto& d = deref(domain, "domain").value;
    auto result = run(deref(objective, "objective").value, d, config);
    *out = new sar_anneal_result{std::move(result), config, d};
  });
}

void sar_anneal_result_destroy(sar_anneal_result* result) { delete result; }

double sar_anneal_result_best_value(const sar_anneal_result* result) {
  return result ? result->value.best_value : 0.0;
}

sar_status sar_anneal_result_best_point(const sar_anneal_result* result,
                                        double* point, size_t dim) {
  return guarded([&] { copy_point(deref(result, "result").value.best, point, dim); });
}

size_t sar_anneal_result_evaluations(const sar_anneal_result* result) {
  return result ? result->value.evaluations : 0;
}

size_t sar_anneal_result_trace_length(const sar_anneal_result* result) {
  return result ? result->value.trace.size() : 0;
}

sar_status sar_anneal_result_write_trace(const sar_anneal_result* result,
                                         const char* path) {
  return guarded([&] {
    const auto& r = deref(result, "result");
    write_text_file(cstr(path, "path"),
                    trace_csv(r.value.trace, r.domain.dim()));
  });
}

sar_status sar_anneal_result_json(const sar_anneal_result* result, char* buf,
                                  size_t cap, size_t* len) {
  return guarded([&] {
    const auto& r = deref(result, "result");
    nlohmann::json j = chain_json(r.value);
    j["config"] = to_json(r.cfg, r.domain);
    j["config"]["domain"] = to_json(r.domain);
    j["summary"] = to_json(summarize(r.value, r.domain));
    copy_text(j.dump(2), buf, cap, len);
  });
}

sar_status sar_anneal_result_summary(const sar_anneal_result* result,
                                     const sar_domain* domain, double target,
                                     double tol, sar_chain_summary* out) {
  return guarded([&] {
    check_out(out);
    const auto& r = deref(result, "result").value;
    const auto& d = deref(domain, "domain").value;
    const auto s = summarize(r, d);
    const auto hit = iterations_to_within(r, target, tol);
    *out = sar_chain_summary{s.best_value, s.iterations_to_best, s.max_excursion,
                             s.outside_count,
                             hit ? static_cast<int64_t>(*hit) : int64_t{-1}};
  });
}

// ---- range estimation ------------------------------------------------------

sar_status sar_estimate_range(const sar_objective* objective,
                              const sar_domain* domain,
                              const sar_anneal_config* cfg, size_t n_seeds,
                              size_t threads, sar_range_result** out) {
  return guarded([&] {
    check_out(out);
    const AnnealConfig config = from_c(deref(cfg, "cfg"));
    const auto& d = deref(domain, "domain").value;
    auto result = estimate_range(deref(objective, "objective").value, d, config,
                                 n_seeds, threads);
    *out = new sar_range_result{std::move(result), config, d};
  });
}

void sar_range_result_destroy(sar_range_result* result) { delete result; }

double sar_range_result_min(const sar_range_result* result) {
  return result ? result->value.f_min : 0.0;
}

double sar_range_result_max(const sar_range_result* result) {
  return result ? result->value.f_max : 0.0;
}

sar_status sar_range_result_argmin(const sar_range_result* result, double* point,
                                   size_t dim) {
  return guarded([&] { copy_point(deref(result, "result").value.x_min, point, dim); });
}

sar_status sar_range_result_argmax(const sar_range_result* result, double* point,
                                   size_t dim) {
  return guarded([&] { copy_point(deref(result, "result").value.x_max, point, dim); });
}

size_t sar_range_result_eval_count(const sar_range_result* result) {
  return result ? result->value.eval_count : 0;
}

size_t sar_range_result_seed_count(const sar_range_result* result) {
  return result ? result->value.seeds_used.size() : 0;
}

sar_status sar_range_result_write_trace(const sar_range_result* result, int which,
                                        size_t index, const char* path) {
  return guarded([&] {
    const auto& r = deref(result, "result");
    require(which == 0 || which == 1, "which must be 0 (min) or 1 (max)");
    const auto& chains = which == 0 ? r.value.min_chains : r.value.max_chains;
    require(index < chains.size(), "chain index out of range");
    if (which == 0) {
      write_text_file(cstr(path, "path"), trace_csv(chains[index].trace, r.domain.dim()));
      return;
    }
    // Maximization chains minimize -f; write them in units of f.
    Trace trace = chains[index].trace;
    for (auto& rec : trace) {
      rec.value = -rec.value;
      rec.best_value = -rec.best_value;
    }
    write_text_file(cstr(path, "path"), trace_csv(trace, r.domain.dim()));
  });
}

sar_status sar_range_result_json(const sar_range_result* result, char* buf,
                                 size_t cap, size_t* len) {
  return guarded([&] {
    const auto& r = deref(result, "result");
    copy_text(to_json(r.value, r.cfg, r.domain).dump(2), buf, cap, len);
  });
}

// ---- grid oracle -----------------------------------------------------------

sar_status sar_grid_oracle(const sar_objective* objective, const sar_domain* domain,
                           size_t points_per_dim, sar_oracle_result** out) {
  return guarded([&] {
    check_out(out);
    const auto& d = deref(domain, "domain").value;
    auto result = grid_oracle(deref(objective, "objective").value, d, points_per_dim);
    *out = new sar_oracle_result{std::move(result), d};
  });
}

void sar_oracle_result_destroy(sar_oracle_result* result) { delete result; }

double sar_oracle_result_min(const sar_oracle_result* result) {
  return result ? result->value.min_value : 0.0;
}

double sar_oracle_result_max(const sar_oracle_result* result) {
  return result ? result->value.max_value : 0.0;
}

sar_status sar_oracle_result_argmin(const sar_oracle_result* result,
                                    double* point, size_t dim) {
  return guarded([&] { copy_point(deref(result, "result").value.min_point, point, dim); });
}

sar_status sar_oracle_result_argmax(const sar_oracle_result* result,
                                    double* point, size_t dim) {
  return guarded([&] { copy_point(deref(result, "result").value.max_point, point, dim); });
}

sar_status sar_oracle_result_json(const sar_oracle_result* result, char* buf,
                                  size_t cap, size_t* len) {
  return guarded([&] {
    const auto& r = deref(result, "result");
    copy_text(to_json(r.value, r.domain).dump(2), buf, cap, len);
  });
}

}  // extern "C"
