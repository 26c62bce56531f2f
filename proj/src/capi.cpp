#include "ridgelab/ridgelab.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "experiment.hpp"
#include "risk.hpp"
#include "seqmodel.hpp"

using namespace ridgelab;

struct rl_dataset {
  Dataset data;
};

struct rl_estimator {
  EstimatorSpec spec;
};

struct rl_experiment {
  ExperimentConfig config;
  std::string config_json;
  rl_progress_fn progress = nullptr;
  void* user = nullptr;
  std::string output;
};

namespace {

thread_local std::string g_last_error;

rl_status map_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return RL_INVALID_ARGUMENT;
    case ErrorCode::DomainError: return RL_DOMAIN_ERROR;
    case ErrorCode::NumericalRankDeficiency: return RL_RANK_DEFICIENT;
    case ErrorCode::NumericalFailure: return RL_NUMERICAL_FAILURE;
    case ErrorCode::DimensionTooLarge: return RL_DIMENSION_TOO_LARGE;
    case ErrorCode::NumericalUnderflow: return RL_NUMERICAL_UNDERFLOW;
    case ErrorCode::ConfigError: return RL_CONFIG_ERROR;
  }
  return RL_INTERNAL_ERROR;
}

template <class Fn>
rl_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RL_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RL_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown exception";
    return RL_INTERNAL_ERROR;
  }
}

template <class T>
void require(const T* p, const char* name) {
  if (p == nullptr) fail(ErrorCode::InvalidArgument, std::string(name) + " is null");
}

RunOptions to_run_options(const rl_options* options) {
  RunOptions opts;
  if (options == nullptr) return opts;
  if (options->workers < 1) fail(ErrorCode::InvalidArgument, "options.workers must be >= 1");
  opts.workers = options->workers;
  switch (options->sphere_mode) {
    case RL_SPHERE_AUTO: opts.sphere.mode = SphereIntegration::Auto; break;
    case RL_SPHERE_QUADRATURE: opts.sphere.mode = SphereIntegration::Quadrature; break;
    case RL_SPHERE_MONTE_CARLO: opts.sphere.mode = SphereIntegration::MonteCarlo; break;
    default: fail(ErrorCode::InvalidArgument, "options.sphere_mode is not a valid mode");
  }
  if (options->sphere_nodes < 2) fail(ErrorCode::InvalidArgument, "options.sphere_nodes must be >= 2");
  if (options->sphere_mc_samples < 2)
    fail(ErrorCode::InvalidArgument, "options.sphere_mc_samples must be >= 2");
  opts.sphere.nodes = options->sphere_nodes;
  opts.sphere.mc_samples = options->sphere_mc_samples;
  return opts;
}

void put(const RiskEstimate& est, rl_risk_estimate* out) {
  *out = rl_risk_estimate{est.mean, est.std_error, est.reps, est.master_seed, est.resampled};
}

void copy_out(const VectorXd& v, double* buffer, size_t length) {
  require(buffer, "buffer");
  if (length < static_cast<size_t>(v.size()))
    fail(ErrorCode::InvalidArgument, "buffer holds " + std::to_string(length) + " values, need " +
                                         std::to_string(v.size()));
  std::memcpy(buffer, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
}

SequenceInstance make_instance(int64_t m, const double* Sigma, const double* z) {
  require(Sigma, "Sigma");
  require(z, "z");
  if (m < 1) fail(ErrorCode::InvalidArgument, "m must be >= 1");
  SequenceInstance inst;
  inst.Sigma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(Sigma, m, m);
  inst.z = Eigen::Map<const VectorXd>(z, m);
  inst.theta = VectorXd::Zero(m);
  return inst;
}

}  // namespace

extern "C" {

const char* rl_last_error(void) { return g_last_error.c_str(); }

const char* rl_status_string(rl_status status) {
  switch (status) {
    case RL_OK: return "ok";
    case RL_INVALID_ARGUMENT: return "invalid argument";
    case RL_DOMAIN_ERROR: return "domain error";
    case RL_RANK_DEFICIENT: return "numerical rank deficiency";
    case RL_NUMERICAL_FAILURE: return "numerical failure";
    case RL_DIMENSION_TOO_LARGE: return "dimension too large";
    case RL_NUMERICAL_UNDERFLOW: return "numerical underflow";
    case RL_CONFIG_ERROR: return "config error";
    case RL_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* rl_version(void) { return RIDGELAB_VERSION; }

void rl_options_init(rl_options* options) {
  if (options == nullptr) return;
  const SphereOptions defaults;
  options->workers = 1;
  options->sphere_mode = RL_SPHERE_AUTO;
  options->sphere_nodes = defaults.nodes;
  options->sphere_mc_samples = defaults.mc_samples;
}

rl_status rl_dataset_sample(int64_t d, int64_t n, double c, int haar_direction, uint64_t seed,
                            uint64_t stream, rl_dataset** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    const ModelSpec spec{d, n, c,
                         haar_direction ? DirectionPolicy::HaarRandomPerReplicate
                                        : DirectionPolicy::FixedFirstAxis};
    spec.validate();
    *out = new rl_dataset{sample_design(spec, SeedStream{seed, stream})};
  });
}

rl_status rl_dataset_from_arrays(int64_t n, int64_t d, const double* X, const double* y,
                                 const double* beta, rl_dataset** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    require(X, "X");
    require(y, "y");
    if (n < 1 || d < 1) fail(ErrorCode::InvalidArgument, "n and d must be >= 1");
    auto ds = std::make_unique<rl_dataset>();
    ds->data.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(X, n, d);
    ds->data.y = Eigen::Map<const VectorXd>(y, n);
    ds->data.beta = beta ? VectorXd(Eigen::Map<const VectorXd>(beta, d)) : VectorXd::Zero(d);
    *out = ds.release();
  });
}

rl_status rl_dataset_shape(const rl_dataset* data, int64_t* n, int64_t* d) {
  return guard([&] {
    require(data, "data");
    if (n) *n = data->data.n();
    if (d) *d = data->data.d();
  });
}

rl_status rl_dataset_copy_X(const rl_dataset* data, double* buffer, size_t length) {
  return guard([&] {
    require(data, "data");
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = data->data.X;
    copy_out(Eigen::Map<const VectorXd>(rm.data(), rm.size()), buffer, length);
  });
}

rl_status rl_dataset_copy_y(const rl_dataset* data, double* buffer, size_t length) {
  return guard([&] {
    require(data, "data");
    copy_out(data->data.y, buffer, length);
  });
}

rl_status rl_dataset_copy_beta(const rl_dataset* data, double* buffer, size_t length) {
  return guard([&] {
    require(data, "data");
    copy_out(data->data.beta, buffer, length);
  });
}

void rl_dataset_destroy(rl_dataset* data) { delete data; }

rl_status rl_estimator_parse(const char* tag, rl_estimator** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    require(tag, "tag");
    *out = new rl_estimator{EstimatorSpec::parse(tag)};
  });
}

rl_status rl_estimator_tag(const rl_estimator* est, char* buffer, size_t length) {
  return guard([&] {
    require(est, "est");
    require(buffer, "buffer");
    if (length == 0) fail(ErrorCode::InvalidArgument, "buffer length is zero");
    const std::string tag = est->spec.tag();
    const size_t k = std::min(tag.size(), length - 1);
    std::memcpy(buffer, tag.data(), k);
    buffer[k] = '\0';
  });
}

rl_status rl_estimator_apply(const rl_estimator* est, const rl_dataset* data, double true_c,
                             const rl_options* options, uint64_t seed, double* out,
                             size_t length) {
  return guard([&] {
    require(est, "est");
    require(data, "data");
    const RunOptions opts = to_run_options(options);
    const VectorXd b = apply_estimator(est->spec, data->data.y, data->data.X, true_c,
                                       opts.sphere, SeedStream{seed, 0});
    copy_out(b, out, length);
  });
}

void rl_estimator_destroy(rl_estimator* est) { delete est; }

rl_status rl_mc_risk(const rl_estimator* est, int64_t d, int64_t n, double c, int haar_direction,
                     uint64_t reps, uint64_t seed, const rl_options* options,
                     rl_risk_estimate* out) {
  return guard([&] {
    require(est, "est");
    require(out, "out");
    const ModelSpec spec{d, n, c,
                         haar_direction ? DirectionPolicy::HaarRandomPerReplicate
                                        : DirectionPolicy::FixedFirstAxis};
    put(mc_risk(est->spec, spec, reps, seed, to_run_options(options)), out);
  });
}

rl_status rl_mc_risk_paired(const rl_estimator* first, const rl_estimator* second, int64_t d,
                            int64_t n, double c, uint64_t reps, uint64_t seed,
                            const rl_options* options, rl_risk_estimate* first_out,
                            rl_risk_estimate* second_out, rl_risk_estimate* difference) {
  return guard([&] {
    require(first, "first");
    require(second, "second");
    const ModelSpec spec{d, n, c, DirectionPolicy::FixedFirstAxis};
    const PairedRiskEstimate p =
        mc_risk_paired(first->spec, second->spec, spec, reps, seed, to_run_options(options));
    if (first_out) put(p.first, first_out);
    if (second_out) put(p.second, second_out);
    if (difference) put(p.difference, difference);
  });
}

rl_status rl_trace_risk_oracle_ridge(int64_t d, int64_t n, double c, uint64_t reps, uint64_t seed,
                                     const rl_options* options, rl_risk_estimate* out) {
  return guard([&] {
    require(out, "out");
    put(trace_risk_oracle_ridge(d, n, c, reps, seed, to_run_options(options)), out);
  });
}

rl_status rl_jensen_bounds(int64_t d, int64_t n, double c, double* lower, double* upper) {
  return guard([&] {
    const BoundReport b = jensen_bounds(d, n, c);
    if (lower) *lower = b.lower;
    if (upper) *upper = b.upper;
  });
}

rl_status rl_ols_risk_exact(int64_t d, int64_t n, double* out) {
  return guard([&] {
    require(out, "out");
    *out = ols_risk_exact(d, n);
  });
}

rl_status rl_scaled_ols_risk_exact(int64_t d, int64_t n, double c, double* out) {
  return guard([&] {
    require(out, "out");
    *out = scaled_ols_risk_exact(d, n, c);
  });
}

rl_status rl_ridge_gap_bound(int64_t d, int64_t n, double c, uint64_t reps, uint64_t seed,
                             const rl_options* options, rl_risk_estimate* out) {
  return guard([&] {
    require(out, "out");
    put(ridge_gap_bound(d, n, c, reps, seed, to_run_options(options)), out);
  });
}

rl_status rl_equivariant_floor(int64_t d, int64_t n, double c, double* out) {
  return guard([&] {
    require(out, "out");
    *out = equivariant_floor(d, n, c);
  });
}

rl_status rl_equivariant_risk(int64_t d, int64_t n, double c, uint64_t reps, uint64_t seed,
                              const rl_options* options, rl_risk_estimate* out) {
  return guard([&] {
    require(out, "out");
    put(equivariant_risk_estimate(d, n, c, reps, seed, to_run_options(options)), out);
  });
}

rl_status rl_linear_minimax_risk(double rho, double c, double* out) {
  return guard([&] {
    require(out, "out");
    *out = linear_minimax_risk(rho, c);
  });
}

rl_status rl_limiting_ridge_risk(double rho, double c, double* out) {
  return guard([&] {
    require(out, "out");
    *out = limiting_ridge_risk(rho, c);
  });
}

rl_status rl_limiting_ridge_residual(double rho, double c, double* out) {
  return guard([&] {
    require(out, "out");
    *out = limiting_ridge_residual(rho, c);
  });
}

rl_status rl_mp_density(double rho, double lambda, double* out) {
  return guard([&] {
    require(out, "out");
    *out = mp_density(rho, lambda);
  });
}

rl_status rl_mp_atom(double rho, double* out) {
  return guard([&] {
    require(out, "out");
    *out = mp_atom(rho);
  });
}

rl_status rl_mp_stieltjes(double rho, double z, double* out) {
  return guard([&] {
    require(out, "out");
    *out = mp_stieltjes(rho, z);
  });
}

rl_status rl_seq_ridge(int64_t m, const double* Sigma, const double* z, double c, double* out) {
  return guard([&] {
    copy_out(seq_ridge(make_instance(m, Sigma, z), c), out, static_cast<size_t>(m));
  });
}

rl_status rl_seq_posterior_mean_sphere(int64_t m, const double* Sigma, const double* z, double c,
                                       const rl_options* options, uint64_t seed, double* out) {
  return guard([&] {
    const RunOptions opts = to_run_options(options);
    const PosteriorMean pm =
        posterior_mean_sphere(make_instance(m, Sigma, z), c, opts.sphere, SeedStream{seed, 0});
    copy_out(pm.mean, out, static_cast<size_t>(m));
  });
}

rl_status rl_marchand_gap_check(int64_t m, double tau2, double c, double* gap, double* bound) {
  return guard([&] {
    const MarchandReport r = marchand_gap_check(IidSeqSpec{m, tau2, c});
    if (gap) *gap = r.gap;
    if (bound) *bound = r.bound;
  });
}

rl_status rl_brown_identity_check(int64_t m, double tau2, double c, double* lhs, double* rhs) {
  return guard([&] {
    const BrownReport r = brown_identity_check(IidSeqSpec{m, tau2, c});
    if (lhs) *lhs = r.lhs;
    if (rhs) *rhs = r.rhs;
  });
}

rl_status rl_stam_min_slack(double tau2_v, double c, double tau2_w, double* slack) {
  return guard([&] {
    require(slack, "slack");
    *slack = stam_bound_check(1, IidSeqSpec{1, tau2_v, c}, tau2_w).min_slack;
  });
}

rl_status rl_experiment_create(const char* json_config, rl_experiment** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    require(json_config, "json_config");
    auto exp = std::make_unique<rl_experiment>();
    exp->config = ExperimentConfig::from_json(json_config);
    exp->config_json = exp->config.to_json();
    *out = exp.release();
  });
}

rl_status rl_experiment_set_progress(rl_experiment* exp, rl_progress_fn fn, void* user) {
  return guard([&] {
    require(exp, "exp");
    exp->progress = fn;
    exp->user = user;
  });
}

rl_status rl_experiment_run(rl_experiment* exp, int* exit_code) {
  return guard([&] {
    require(exp, "exp");
    require(exit_code, "exit_code");
    ProgressFn progress;
    if (exp->progress)
      progress = [exp](const std::string& msg) { exp->progress(msg.c_str(), exp->user); };
    exp->output.clear();
    ExperimentResult result = run_experiment(exp->config, progress);
    exp->output = std::move(result.output);
    *exit_code = result.exit_code;
  });
}

rl_status rl_experiment_output(const rl_experiment* exp, const char** data, size_t* length) {
  return guard([&] {
    require(exp, "exp");
    require(data, "data");
    *data = exp->output.c_str();
    if (length) *length = exp->output.size();
  });
}

rl_status rl_experiment_config_json(const rl_experiment* exp, const char** data,
                                    size_t* length) {
  return guard([&] {
    require(exp, "exp");
    require(data, "data");
    *data = exp->config_json.c_str();
    if (length) *length = exp->config_json.size();
  });
}

void rl_experiment_destroy(rl_experiment* exp) { delete exp; }

}  // extern "C"
