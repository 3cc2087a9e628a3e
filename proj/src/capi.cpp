// extern "C" shim over the C++ core: opaque handles, status codes, and a
// thread-local error message.
#include "lerwcap.h"

#include <cstring>
#include <new>
#include <string>

#include "lerwlab/capacity.hpp"
#include "lerwlab/chain_oracle.hpp"
#include "lerwlab/experiments.hpp"
#include "lerwlab/io.hpp"
#include "lerwlab/twosided.hpp"
#include "lerwlab/walk.hpp"

namespace {

thread_local std::string g_last_error;

lerw_status fail(lerw_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <class Fn>
lerw_status guarded(Fn&& fn) {
  try {
    fn();
    return LERW_OK;
  } catch (const std::invalid_argument& e) {
    return fail(LERW_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(LERW_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(LERW_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(LERW_ERR_RUNTIME, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill_estimate(const lerwlab::EstimateRecord& rec, lerw_estimate* out,
                   char** json_out) {
  if (out) {
    out->value = rec.value;
    out->stderr_value = rec.stderr_value;
    out->trials = rec.trials;
    std::strncpy(out->method, rec.method.c_str(), sizeof(out->method) - 1);
    out->method[sizeof(out->method) - 1] = '\0';
  }
  if (json_out) *json_out = dup_string(rec.to_json().dump());
}

lerwlab::Path path_from_handle(const lerw_path* p);

}  // namespace

struct lerw_rng {
  lerwlab::RngStream stream;
};

struct lerw_path {
  lerwlab::Path path;
};

struct lerw_lep {
  lerwlab::LoopErasedPath lep;
};

struct lerw_chain {
  lerwlab::FiniteChain chain;
};

namespace {

lerwlab::Path path_from_handle(const lerw_path* p) { return p->path; }

lerwlab::PointSet set_from_path(const lerwlab::Path& p) {
  lerwlab::PointSet s;
  for (const auto& pt : p.pts)
    if (!s.insert(pt))
      throw std::invalid_argument("point set: duplicate point");
  return s;
}

}  // namespace

extern "C" {

const char* lerw_version(void) { return "lerwlab 1.0.0"; }

const char* lerw_last_error(void) { return g_last_error.c_str(); }

void lerw_string_free(char* s) { delete[] s; }
void lerw_buffer_free(int64_t* buf) { delete[] buf; }

lerw_status lerw_rng_create(uint64_t master_seed, uint64_t stream_id,
                            lerw_rng** out) {
  if (!out) return fail(LERW_ERR_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] { *out = new lerw_rng{lerwlab::RngStream(master_seed, stream_id)}; });
}

void lerw_rng_destroy(lerw_rng* rng) { delete rng; }

lerw_status lerw_rng_next_u64(lerw_rng* rng, uint64_t* out) {
  if (!rng || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = rng->stream.next_u64();
  return LERW_OK;
}

lerw_status lerw_path_create(int dim, const int64_t* coords, size_t n_points,
                             lerw_path** out) {
  if (!coords || !out || n_points == 0)
    return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument or empty path");
  return guarded([&] {
    if (dim < 1 || dim > lerwlab::kMaxDim)
      throw std::invalid_argument("dim out of range");
    lerwlab::Path p;
    p.dim = dim;
    p.pts.resize(n_points);
    for (size_t i = 0; i < n_points; ++i)
      for (int k = 0; k < dim; ++k) p.pts[i][k] = coords[i * static_cast<size_t>(dim) + static_cast<size_t>(k)];
    *out = new lerw_path{std::move(p)};
  });
}

void lerw_path_destroy(lerw_path* p) { delete p; }

int lerw_path_dim(const lerw_path* p) { return p ? p->path.dim : 0; }

size_t lerw_path_points(const lerw_path* p) { return p ? p->path.pts.size() : 0; }

lerw_status lerw_path_coords(const lerw_path* p, int64_t* buf, size_t buf_points) {
  if (!p || !buf) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  if (buf_points < p->path.pts.size())
    return fail(LERW_ERR_INVALID_ARGUMENT, "buffer too small");
  for (size_t i = 0; i < p->path.pts.size(); ++i)
    for (int k = 0; k < p->path.dim; ++k)
      buf[i * static_cast<size_t>(p->path.dim) + static_cast<size_t>(k)] = p->path.pts[i][k];
  return LERW_OK;
}

lerw_status lerw_path_save(const lerw_path* p, const char* file) {
  if (!p || !file) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    try {
      lerwlab::save_path(p->path, file);
    } catch (const std::runtime_error& e) {
      throw std::ios_base::failure(e.what());
    }
  });
}

lerw_status lerw_path_load(const char* file, int dim, lerw_path** out) {
  if (!file || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    try {
      *out = new lerw_path{lerwlab::load_path(file, dim)};
    } catch (const std::runtime_error& e) {
      throw std::ios_base::failure(e.what());
    }
  });
}

lerw_status lerw_path_to_text(const lerw_path* p, char** out) {
  if (!p || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = dup_string(lerwlab::path_to_text(p->path)); });
}

lerw_status lerw_srw_sample(int dim, int64_t n_steps, lerw_rng* rng,
                            lerw_path** out) {
  if (!rng || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    *out = new lerw_path{lerwlab::srw_sample(dim, n_steps, rng->stream)};
  });
}

lerw_status lerw_path_shift(const lerw_path* p, int64_t k, lerw_path** out) {
  if (!p || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = new lerw_path{lerwlab::shift_path(p->path, k)}; });
}

lerw_status lerw_path_cut_times(const lerw_path* p, int64_t** out, size_t* n_out) {
  if (!p || !out || !n_out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    auto cuts = lerwlab::cut_times(p->path);
    auto* buf = new int64_t[cuts.size()];
    std::memcpy(buf, cuts.data(), cuts.size() * sizeof(int64_t));
    *out = buf;
    *n_out = cuts.size();
  });
}

lerw_status lerw_loop_erase(const lerw_path* omega, lerw_lep** out) {
  if (!omega || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = new lerw_lep{lerwlab::loop_erase(omega->path)}; });
}

lerw_status lerw_lerw_sample(int dim, int64_t target_len, double safety_factor,
                             lerw_rng* rng, lerw_lep** out) {
  if (!rng || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    double sf = safety_factor <= 0 ? 3.0 : safety_factor;
    *out = new lerw_lep{lerwlab::lerw_sample(dim, target_len, rng->stream, sf)};
  });
}

void lerw_lep_destroy(lerw_lep* lep) { delete lep; }

lerw_status lerw_lep_path(const lerw_lep* lep, lerw_path** out) {
  if (!lep || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = new lerw_path{lep->lep.path}; });
}

size_t lerw_lep_points(const lerw_lep* lep) {
  return lep ? lep->lep.path.pts.size() : 0;
}

int64_t lerw_lep_source_length(const lerw_lep* lep) {
  return lep ? lep->lep.source_length : -1;
}

lerw_status lerw_lep_erasure_times(const lerw_lep* lep, int64_t* buf,
                                   size_t buf_len) {
  if (!lep || !buf) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  if (buf_len < lep->lep.erasure_times.size())
    return fail(LERW_ERR_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, lep->lep.erasure_times.data(),
              lep->lep.erasure_times.size() * sizeof(int64_t));
  return LERW_OK;
}

lerw_status lerw_lep_retained_count(const lerw_lep* lep, int64_t j, int64_t* out) {
  if (!lep || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = lerwlab::retained_count(lep->lep, j); });
}

lerw_status lerw_capacity_escape_sum(const lerw_path* points, double R,
                                     int64_t trials_per_point, lerw_rng* rng,
                                     int threads, lerw_estimate* out,
                                     char** json_out) {
  if (!points || !rng) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    auto set = set_from_path(points->path);
    lerwlab::McOptions opt;
    opt.threads = threads;
    auto rec = lerwlab::capacity_mc(set, points->path.dim, R, trials_per_point,
                                    rng->stream, opt);
    fill_estimate(rec, out, json_out);
  });
}

lerw_status lerw_capacity_decomposition(const lerw_path* ordered, double R,
                                        int64_t trials_per_point, lerw_rng* rng,
                                        int threads, lerw_estimate* out,
                                        char** json_out) {
  if (!ordered || !rng) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    lerwlab::McOptions opt;
    opt.threads = threads;
    auto rec = lerwlab::capacity_decomposition_mc(ordered->path.pts,
                                                  ordered->path.dim, R,
                                                  trials_per_point, rng->stream, opt);
    fill_estimate(rec, out, json_out);
  });
}

lerw_status lerw_capacity_hitting(const lerw_path* points, double y_radius,
                                  double kill_factor, int64_t trials,
                                  lerw_rng* rng, int threads,
                                  lerw_estimate* out, char** json_out) {
  if (!points || !rng) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    auto set = set_from_path(points->path);
    lerwlab::PointSetTarget target(set);
    lerwlab::McOptions opt;
    opt.threads = threads;
    auto rec = lerwlab::capacity_via_hitting(target, points->path.dim, y_radius,
                                             trials, rng->stream,
                                             kill_factor <= 0 ? 10.0 : kill_factor,
                                             opt);
    fill_estimate(rec, out, json_out);
  });
}

lerw_status lerw_sausage_capacity(const lerw_path* anchor_path, double eps,
                                  double y_radius, double kill_factor,
                                  int64_t trials, lerw_rng* rng, int threads,
                                  lerw_estimate* out, char** json_out) {
  if (!anchor_path || !rng) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    lerwlab::McOptions opt;
    opt.threads = threads;
    auto rec = lerwlab::sausage_capacity_mc(anchor_path->path, eps, y_radius,
                                            trials, rng->stream,
                                            kill_factor <= 0 ? 10.0 : kill_factor,
                                            opt);
    fill_estimate(rec, out, json_out);
  });
}

lerw_status lerw_escape_probability(const lerw_path* points,
                                    const int64_t* from, double R,
                                    int64_t trials, lerw_rng* rng,
                                    double* lower, double* upper) {
  if (!points || !from || !rng)
    return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    auto set = set_from_path(points->path);
    lerwlab::Point a;
    for (int k = 0; k < points->path.dim; ++k) a[k] = from[k];
    auto est = lerwlab::escape_probability_mc(set, a, points->path.dim, R,
                                              trials, rng->stream);
    if (lower) *lower = est.lower;
    if (upper) *upper = est.upper;
  });
}

lerw_status lerw_green_estimate(int dim, const int64_t* y, const char* method,
                                int64_t trials, lerw_rng* rng, double* value,
                                double* stderr_out) {
  if (!y || !method || !rng) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    lerwlab::Point p;
    if (dim < 1 || dim > lerwlab::kMaxDim)
      throw std::invalid_argument("dim out of range");
    for (int k = 0; k < dim; ++k) p[k] = y[k];
    auto g = lerwlab::green_estimate(dim, p, method, trials, rng->stream);
    if (value) *value = g.value;
    if (stderr_out) *stderr_out = g.stderr_value;
  });
}

lerw_status lerw_chain_load(const char* file, lerw_chain** out) {
  if (!file || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] { *out = new lerw_chain{lerwlab::load_chain(file)}; });
}

lerw_status lerw_chain_boxed_walk(int dim, int radius, lerw_chain** out,
                                  int* origin_state) {
  if (!out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    *out = new lerw_chain{lerwlab::boxed_walk_chain(dim, radius)};
    if (origin_state) *origin_state = lerwlab::boxed_walk_origin_state(dim, radius);
  });
}

void lerw_chain_destroy(lerw_chain* chain) { delete chain; }

lerw_status lerw_chain_escape(const lerw_chain* chain, const int32_t* states,
                              size_t n, int32_t x, double* out) {
  if (!chain || !states || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    std::vector<int> a(states, states + n);
    *out = chain->chain.exact_escape(a, x);
  });
}

lerw_status lerw_chain_capacity(const lerw_chain* chain, const int32_t* states,
                                size_t n, double* out) {
  if (!chain || !states || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    std::vector<int> a(states, states + n);
    *out = chain->chain.exact_capacity(a);
  });
}

lerw_status lerw_chain_decomposition(const lerw_chain* chain,
                                     const int32_t* ordered, size_t n,
                                     double* out) {
  if (!chain || !ordered || !out) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    std::vector<int> a(ordered, ordered + n);
    *out = chain->chain.exact_decomposition(a);
  });
}

lerw_status lerw_oracle_suite(uint64_t seed, int n_chains, int max_states,
                              int max_subset, int orderings,
                              double* max_deviation) {
  if (!max_deviation) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    lerwlab::RngStream rng(seed, lerwlab::hash_stream_name("oracle-suite"));
    auto res = lerwlab::run_decomposition_suite(n_chains, max_states, max_subset,
                                                orderings, rng);
    *max_deviation = res.max_deviation;
  });
}

lerw_status lerw_two_sided_sample(int dim, int64_t side_len, int64_t horizon,
                                  lerw_rng* rng, lerw_path** forward,
                                  lerw_path** backward, int64_t* attempts,
                                  int64_t* accepted, int64_t* late_violations) {
  if (!rng || !forward || !backward)
    return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    lerwlab::AcceptanceStats stats;
    auto ts = lerwlab::two_sided_sample_highdim(dim, side_len, horizon,
                                                rng->stream, &stats);
    *forward = new lerw_path{ts.forward.path};
    *backward = new lerw_path{ts.backward.path};
    if (attempts) *attempts = stats.attempts;
    if (accepted) *accepted = stats.accepted;
    if (late_violations) *late_violations = stats.extension_violations;
  });
}

lerw_status lerw_scaled_escape(const lerw_lep* eta, int64_t n,
                               int64_t w_trials, int variant, lerw_rng* rng,
                               int threads, double* value, double* lower,
                               double* upper) {
  if (!eta || !rng) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    lerwlab::McOptions opt;
    opt.threads = threads;
    auto v = variant == 0 ? lerwlab::EscapeScalingVariant::kWalkTruncated
                          : lerwlab::EscapeScalingVariant::kPathTruncated;
    auto e = lerwlab::scaled_escape_estimate(eta->lep, n, w_trials, v,
                                             rng->stream, opt);
    if (value) *value = e.value;
    if (lower) *lower = e.lower;
    if (upper) *upper = e.upper;
  });
}

lerw_status lerw_stationarity_diagnostic(int dim, int64_t n_samples,
                                         const int64_t* k_shifts,
                                         size_t n_shifts, int64_t horizon,
                                         lerw_rng* rng, char** json_out) {
  if (!k_shifts || !rng || !json_out)
    return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    std::vector<int64_t> ks(k_shifts, k_shifts + n_shifts);
    auto rep = lerwlab::stationarity_diagnostic(dim, n_samples, ks, horizon,
                                                rng->stream);
    *json_out = dup_string(rep.to_json().dump());
  });
}

lerw_status lerw_experiment_run(const char* config_file, const char* out_dir,
                                int threads, uint64_t seed_override,
                                int has_seed_override, char** summary_json) {
  if (!config_file) return fail(LERW_ERR_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    lerwlab::ExperimentConfig cfg;
    try {
      cfg = lerwlab::ExperimentConfig::load(config_file);
    } catch (const std::runtime_error& e) {
      throw std::ios_base::failure(e.what());
    }
    if (out_dir) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (has_seed_override) cfg.master_seed = seed_override;
    auto rep = lerwlab::run_experiment(cfg);
    if (summary_json) {
      nlohmann::json j{{"config", rep.config.to_json()}, {"summary", rep.summary}};
      *summary_json = dup_string(j.dump());
    }
  });
}

}  // extern "C"
