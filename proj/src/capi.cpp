#include "gnsfde/gnsfde.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "gnsfde/core_types.hpp"
#include "gnsfde/error.hpp"
#include "gnsfde/functionals.hpp"
#include "gnsfde/gheat.hpp"
#include "gnsfde/nsfde.hpp"
#include "gnsfde/runner.hpp"
#include "gnsfde/scenarios.hpp"

struct gn_grid {
    gnsfde::TimeGrid value;
};
struct gn_path {
    gnsfde::Path value;
};
struct gn_coeffs {
    gnsfde::CoeffSet value;
};
struct gn_policy {
    gnsfde::VolPolicy value;
};
struct gn_gbm {
    gnsfde::GBMPath value;
};

namespace {

struct LastError {
    std::string message;
    std::string field;
    long long step = -1;
};

thread_local LastError last_error;

gn_status status_of(gnsfde::ErrorKind kind) {
    using gnsfde::ErrorKind;
    switch (kind) {
        case ErrorKind::Domain: return GN_ERR_DOMAIN;
        case ErrorKind::Config: return GN_ERR_CONFIG;
        case ErrorKind::Input: return GN_ERR_INPUT;
        case ErrorKind::Usage: return GN_ERR_USAGE;
        case ErrorKind::Step: return GN_ERR_STEP;
        case ErrorKind::Divergence: return GN_ERR_DIVERGENCE;
        case ErrorKind::Estimation: return GN_ERR_ESTIMATION;
    }
    return GN_ERR_INTERNAL;
}

template <class F>
gn_status guarded(F&& f) {
    last_error = {};
    try {
        f();
        return GN_OK;
    } catch (const gnsfde::Error& e) {
        last_error.message = e.what();
        if (e.field()) last_error.field = *e.field();
        if (e.step()) last_error.step = static_cast<long long>(*e.step());
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error.message = "out of memory";
    } catch (const std::exception& e) {
        last_error.message = e.what();
    } catch (...) {
        last_error.message = "unknown failure";
    }
    return GN_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
    if (p == nullptr) throw gnsfde::usage_error(std::string(what) + " must not be null");
}

gnsfde::CoeffFunctional functional_of(const gn_coeff_spec* s) {
    require(s, "coefficient spec");
    const gnsfde::ControlCoupling coupling{s->c0, s->c1, s->c2};
    const auto clamp = s->has_clamp ? std::optional<double>(s->clamp) : std::nullopt;
    switch (s->kind) {
        case GN_COEFF_POINTWISE: return gnsfde::CoeffFunctional::pointwise(s->scale, coupling, clamp);
        case GN_COEFF_INTEGRAL: return gnsfde::CoeffFunctional::integral(s->scale, coupling, clamp);
        case GN_COEFF_AFFINE: return gnsfde::CoeffFunctional::affine(s->scale, s->offset, coupling, clamp);
    }
    throw gnsfde::usage_error("unknown coefficient kind");
}

gnsfde::RunRequest request_of(const char* command, const char* config_path, const char* preset,
                              const char* overrides_json) {
    require(command, "command");
    gnsfde::RunRequest req;
    req.command = command;
    if (config_path) req.config_path = config_path;
    if (preset) req.preset = preset;
    if (overrides_json) req.overrides = overrides_json;
    return req;
}

std::string joined(const std::vector<std::string>& names) {
    std::string s;
    for (const auto& n : names) s += n + "\n";
    return s;
}

}  // namespace

extern "C" {

const char* gn_version(void) { return "1.0.0"; }

const char* gn_status_string(gn_status status) {
    switch (status) {
        case GN_OK: return "ok";
        case GN_ERR_DOMAIN: return "domain";
        case GN_ERR_CONFIG: return "config";
        case GN_ERR_INPUT: return "input";
        case GN_ERR_USAGE: return "usage";
        case GN_ERR_STEP: return "step";
        case GN_ERR_DIVERGENCE: return "divergence";
        case GN_ERR_ESTIMATION: return "estimation";
        case GN_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* gn_last_error(void) { return last_error.message.c_str(); }
const char* gn_last_error_field(void) { return last_error.field.c_str(); }
long long gn_last_error_step(void) { return last_error.step; }

gn_status gn_g_of(double a, double sigma_min, double sigma_max, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = gnsfde::g_of(a, gnsfde::VolBounds(sigma_min, sigma_max));
    });
}

gn_status gn_gnormal_cdf(double y, double sigma_min, double sigma_max, double t, double dx, double* out) {
    return guarded([&] {
        require(out, "out");
        gnsfde::GNormalOptions opts;
        opts.dx = dx;
        *out = gnsfde::g_normal_upper_cdf(y, gnsfde::VolBounds(sigma_min, sigma_max), t, opts);
    });
}

gn_status gn_gnormal_table(double sigma_min, double sigma_max, double t, double dx, const double* y, size_t n,
                           double* cdf, double* density) {
    return guarded([&] {
        require(y, "y");
        require(cdf, "cdf");
        require(density, "density");
        gnsfde::GNormalOptions opts;
        opts.dx = dx;
        const auto table =
            gnsfde::g_normal_table(gnsfde::VolBounds(sigma_min, sigma_max), t, std::span<const double>(y, n), opts);
        std::copy(table.cdf.begin(), table.cdf.end(), cdf);
        std::copy(table.density.begin(), table.density.end(), density);
    });
}

gn_status gn_grid_create(double tau, double horizon, size_t steps, gn_grid** out) {
    return guarded([&] {
        require(out, "out");
        *out = new gn_grid{gnsfde::TimeGrid(tau, horizon, steps)};
    });
}
void gn_grid_destroy(gn_grid* grid) { delete grid; }
double gn_grid_step(const gn_grid* grid) { return grid->value.step(); }
size_t gn_grid_size(const gn_grid* grid) { return grid->value.size(); }
size_t gn_grid_zero_index(const gn_grid* grid) { return grid->value.zero_index(); }
double gn_grid_time(const gn_grid* grid, size_t k) { return grid->value.time(k); }

gn_status gn_path_create(const gn_grid* grid, const double* values, size_t n, gn_path** out) {
    return guarded([&] {
        require(grid, "grid");
        require(values, "values");
        require(out, "out");
        *out = new gn_path{gnsfde::Path(grid->value, std::vector<double>(values, values + n))};
    });
}
void gn_path_destroy(gn_path* path) { delete path; }
size_t gn_path_size(const gn_path* path) { return path->value.size(); }

gn_status gn_path_values(const gn_path* path, double* out, size_t n) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        if (n < path->value.size()) throw gnsfde::usage_error("output buffer too small");
        const auto v = path->value.values();
        std::copy(v.begin(), v.end(), out);
    });
}

gn_status gn_segment_eval(const gn_path* path, size_t anchor, double lambda, double* out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = gnsfde::Segment(path->value, anchor)(lambda);
    });
}

gn_status gn_segment_integral(const gn_path* path, size_t anchor, double* out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = gnsfde::Segment(path->value, anchor).integral();
    });
}

gn_status gn_coeffs_create(const gn_coeff_spec* q, const gn_coeff_spec* b, const gn_coeff_spec* gamma,
                           const gn_coeff_spec* sigma, double tau, gn_coeffs** out) {
    return guarded([&] {
        require(out, "out");
        *out = new gn_coeffs{
            gnsfde::CoeffSet(functional_of(q), functional_of(b), functional_of(gamma), functional_of(sigma), tau)};
    });
}

gn_status gn_coeffs_example(double tau, gn_coeffs** out) {
    return guarded([&] {
        require(out, "out");
        *out = new gn_coeffs{gnsfde::CoeffSet::example(tau)};
    });
}
void gn_coeffs_destroy(gn_coeffs* coeffs) { delete coeffs; }

gn_status gn_coeffs_lipschitz(const gn_coeffs* coeffs, double* k1, double* k0, double* contraction) {
    return guarded([&] {
        require(coeffs, "coeffs");
        const auto r = gnsfde::lipschitz_constants(coeffs->value);
        if (k1) *k1 = r.k1;
        if (k0) *k0 = r.k0;
        if (contraction) *contraction = r.contraction;
    });
}

gn_status gn_policy_constant(double rate, double sigma_min, double sigma_max, gn_policy** out) {
    return guarded([&] {
        require(out, "out");
        *out = new gn_policy{gnsfde::VolPolicy::constant(rate, gnsfde::VolBounds(sigma_min, sigma_max))};
    });
}
void gn_policy_destroy(gn_policy* policy) { delete policy; }

gn_status gn_gbm_sample(const gn_policy* policy, const gn_grid* grid, uint64_t seed, gn_gbm** out) {
    return guarded([&] {
        require(policy, "policy");
        require(grid, "grid");
        require(out, "out");
        *out = new gn_gbm{gnsfde::sample_gbm(policy->value, grid->value, seed)};
    });
}
void gn_gbm_destroy(gn_gbm* gbm) { delete gbm; }
size_t gn_gbm_size(const gn_gbm* gbm) { return gbm->value.b.size(); }

gn_status gn_gbm_values(const gn_gbm* gbm, double* b, double* qv, size_t n) {
    return guarded([&] {
        require(gbm, "gbm");
        if (n < gbm->value.b.size()) throw gnsfde::usage_error("output buffer too small");
        if (b) std::copy(gbm->value.b.begin(), gbm->value.b.end(), b);
        if (qv) std::copy(gbm->value.qv.begin(), gbm->value.qv.end(), qv);
    });
}

gn_status gn_gbm_qv_residual(const gn_gbm* gbm, double* out) {
    return guarded([&] {
        require(gbm, "gbm");
        require(out, "out");
        *out = gnsfde::check_qv_identity(gbm->value);
    });
}

gn_status gn_simulate(const gn_coeffs* coeffs, const gn_path* eta, const gn_gbm* gbm, gn_path** out) {
    return guarded([&] {
        require(coeffs, "coeffs");
        require(eta, "eta");
        require(gbm, "gbm");
        require(out, "out");
        *out = new gn_path{gnsfde::simulate_nsfde(coeffs->value, eta->value, gbm->value)};
    });
}

gn_status gn_run_command(const char* command, const char* config_path, const char* preset,
                         const char* overrides_json, const char* out_dir) {
    return guarded([&] {
        auto req = request_of(command, config_path, preset, overrides_json);
        if (out_dir) req.out_dir = out_dir;
        gnsfde::run(req);
    });
}

gn_status gn_effective_config(const char* command, const char* config_path, const char* preset,
                              const char* overrides_json, char* buf, size_t cap, size_t* needed) {
    return guarded([&] {
        const auto text = gnsfde::effective_config(request_of(command, config_path, preset, overrides_json));
        if (needed) *needed = text.size() + 1;
        if (buf && cap > 0) {
            const size_t n = std::min(cap - 1, text.size());
            std::memcpy(buf, text.data(), n);
            buf[n] = '\0';
        }
    });
}

const char* gn_preset_names(void) {
    static const std::string names = joined(gnsfde::preset_names());
    return names.c_str();
}

const char* gn_command_names(void) {
    static const std::string names = joined(gnsfde::run_commands());
    return names.c_str();
}

}  // extern "C"
