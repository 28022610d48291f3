#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "bbmlab/cli/app.hpp"
#include "bbmlab/cli/artifacts.hpp"
#include "bbmlab/cli/config.hpp"
#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/deviation_constants.hpp"
#include "bbmlab/core/intervals.hpp"
#include "bbmlab/core/prediction.hpp"
#include "bbmlab/core/regime.hpp"
#include "bbmlab/error.hpp"
#include "bbmlab/fkpp/field_io.hpp"
#include "bbmlab/fkpp/first_branch.hpp"
#include "bbmlab/fkpp/solvers.hpp"
#include "bbmlab/fkpp/wave.hpp"
#include "bbmlab/io/files.hpp"
#include "bbmlab/sim/bbm.hpp"
#include "bbmlab/verify/conditional.hpp"
#include "bbmlab/verify/diagnostics.hpp"
#include "bbmlab/verify/report.hpp"
#include "bbmlab/verify/tolerances.hpp"

namespace bbm::cli {

namespace fs = std::filesystem;
using io::format_double;
using ordered = nlohmann::ordered_json;

namespace {

/// Outputs are written into a staging directory inside out_dir and moved into place on commit,
/// so a failing command leaves no partial artifacts.
class RunContext {
public:
    RunContext(const Invocation& inv, const Config& config, std::string config_text)
        : inv_(inv), config_(config), start_(std::chrono::steady_clock::now()) {
        fs::create_directories(inv.out_dir);
        staging_ = inv.out_dir / fmt::format(".staging-{}", ::getpid());
        fs::remove_all(staging_);
        fs::create_directories(staging_);
        manifest_.tool_version = kToolVersion;
        manifest_.command = inv.command;
        if (inv.seed) manifest_.flags["seed"] = std::to_string(*inv.seed);
        if (inv.shards) manifest_.flags["shards"] = std::to_string(*inv.shards);
        if (inv.probes) manifest_.flags["probes"] = *inv.probes;
        if (inv.suite) manifest_.flags["suite"] = *inv.suite;
        manifest_.config_sha256 = io::sha256_hex(config_text);
        manifest_.config_text = std::move(config_text);
        manifest_.config_dir = config.base_dir().string();
    }
    ~RunContext() {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
    RunContext(const RunContext&) = delete;
    RunContext& operator=(const RunContext&) = delete;

    const Config& config() const { return config_; }
    const Invocation& invocation() const { return inv_; }
    const fs::path& staging() const { return staging_; }

    void write(const std::string& name, std::string_view contents) {
        io::write_atomic(staging_ / name, contents);
        staged_.push_back(name);
    }
    void adopt(const fs::path& staged_file) { staged_.push_back(staged_file.filename().string()); }

    /// Integrity-checks an input artifact and records it.
    fs::path input(const fs::path& path, bool require_manifest = true) {
        const fs::path abs = fs::absolute(path).lexically_normal();
        const std::string hash = check_artifact(abs, require_manifest);
        manifest_.inputs.push_back({abs.string(), hash});
        return abs;
    }

    void seed(std::uint64_t s) { manifest_.seed = s; }
    void count(const std::string& key, std::uint64_t v) { manifest_.counts[key] = v; }

    void commit() {
        for (const auto& name : staged_) {
            const fs::path target = inv_.out_dir / name;
            fs::rename(staging_ / name, target);
            manifest_.outputs.push_back({name, io::sha256_file(target)});
        }
        manifest_.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        io::write_atomic(inv_.out_dir / kManifestName, manifest_json(manifest_));
    }

private:
    const Invocation& inv_;
    const Config& config_;
    std::chrono::steady_clock::time_point start_;
    fs::path staging_;
    std::vector<std::string> staged_;
    RunManifest manifest_;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorKind::Configuration, fmt::format("{}: '{}' is not a number", what, item));
        }
    }
    if (out.empty()) fail(ErrorKind::Configuration, fmt::format("{}: empty list", what));
    return out;
}

std::uint64_t resolve_seed(const Invocation& inv, const Config& c, const std::string& section) {
    if (inv.seed) return *inv.seed;
    if (c.has(section, "seed")) return c.get_uint(section, "seed");
    fail(ErrorKind::Configuration, fmt::format("{}: [{}] needs a seed (config key 'seed' or --seed); there is no default",
                                               c.source(), section));
}

// ---------------------------------------------------------------- solve

int cmd_solve(RunContext& ctx, std::ostream& out) {
    const Config& c = ctx.config();
    const std::string s = "solve";
    c.expect_keys(s, {"scheme", "t_max", "z_min", "z_max", "dz", "dt", "window", "store_every", "probes", "stem",
                      "rannacher_steps", "moving_width", "kernel_halfwidth"});
    const std::string scheme = c.get_choice(s, "scheme", {"fd", "duhamel"});
    SpaceTimeGrid g;
    g.t_max = c.get_double(s, "t_max");
    g.z_min = c.get_double(s, "z_min", g.z_min);
    g.z_max = c.get_double(s, "z_max", g.z_max);
    g.dz = c.get_double(s, "dz", g.dz);
    g.dt = c.get_double(s, "dt", g.dt);
    g.window_policy = c.get_choice(s, "window", {"fixed", "moving"}, "fixed") == "fixed" ? WindowPolicy::Fixed
                                                                                          : WindowPolicy::MovingWithFront;
    const std::size_t store_every = c.get_uint(s, "store_every", 1);
    const std::string stem = c.find_string(s, "stem").value_or("field");
    std::vector<double> probes;
    if (ctx.invocation().probes) probes = parse_list(*ctx.invocation().probes, "--probes");
    else if (c.has(s, "probes")) probes = c.get_doubles(s, "probes");
    try {
        g.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Configuration, fmt::format("{}: [solve] {}", c.source(), e.what()));
    }
    if (scheme == "duhamel" && g.window_policy != WindowPolicy::Fixed)
        fail(ErrorKind::Configuration, fmt::format("{}: [solve] the duhamel scheme needs window = fixed", c.source()));

    SolutionField field;
    if (scheme == "fd") {
        FdOptions o;
        o.store_every = store_every;
        o.rannacher_steps = c.get_uint(s, "rannacher_steps", o.rannacher_steps);
        o.moving_width = c.get_double(s, "moving_width", o.moving_width);
        field = solve_fd(g, InitialCondition::heaviside(), o);
    } else {
        DuhamelOptions o;
        o.store_every = store_every;
        o.kernel_halfwidth = c.get_double(s, "kernel_halfwidth", o.kernel_halfwidth);
        field = solve_duhamel(g, o);
    }

    const double t = field.times().back();
    std::ostringstream pc;
    pc << "z,t,u,logu\n";
    for (double z : probes) {
        const FieldSample v = field.evaluate(z, t);
        pc << format_double(z) << "," << format_double(t) << "," << format_double(v.u) << "," << format_double(v.logu) << "\n";
        out << fmt::format("u({:g}, {:g}) = {:.12g}\n", z, t, v.u);
    }
    const FieldFiles files = save_field(field, ctx.staging(), stem);
    ctx.adopt(files.header);
    ctx.adopt(files.payload);
    if (!probes.empty()) ctx.write("probes.csv", pc.str());
    ctx.count("steps", g.steps());
    ctx.count("slices", field.slices());
    ctx.commit();
    out << fmt::format("{} field: {} slices x {} nodes -> {}\n", scheme, field.slices(), field.nodes(),
                       (ctx.invocation().out_dir / files.header.filename()).string());
    return kExitPass;
}

// ---------------------------------------------------------------- wave

int cmd_wave(RunContext& ctx, std::ostream& out) {
    const Config& c = ctx.config();
    const std::string s = "wave";
    c.expect_keys(s, {"field", "t", "left_fit_lo", "left_fit_hi", "history_from", "residual_lo", "residual_hi", "residual_h"});
    const fs::path field_path = ctx.input(c.get_path(s, "field"));
    WaveOptions o;
    o.left_fit_lo = c.get_double(s, "left_fit_lo", o.left_fit_lo);
    o.left_fit_hi = c.get_double(s, "left_fit_hi", o.left_fit_hi);
    o.history_from = c.get_double(s, "history_from", o.history_from);
    const double lo = c.get_double(s, "residual_lo", -5.0);
    const double hi = c.get_double(s, "residual_hi", 5.0);
    const SolutionField field = load_field(field_path);
    const double t = c.get_double(s, "t", field.times().back());
    const double h = c.get_double(s, "residual_h", field.grid().dz);
    const WaveProfile wave = extract_wave(field, t, o);
    const double residual = wave_ode_residual(wave, lo, hi, h);

    save_wave(wave, ctx.staging() / "wave.csv");
    ctx.adopt(ctx.staging() / "wave.csv");
    ordered j;
    j["t_source"] = wave.t_source;
    j["points"] = wave.z.size();
    j["left_slope"] = wave.left_slope;
    j["left_fit"] = {wave.left_fit_lo, wave.left_fit_hi};
    j["bramson_offset"] = wave.bramson_offset ? ordered(*wave.bramson_offset) : ordered(nullptr);
    j["ode_residual"] = residual;
    j["ode_residual_window"] = {lo, hi};
    j["ode_residual_step"] = h;
    ctx.write("wave_summary.json", j.dump(2) + "\n");
    ctx.commit();
    out << fmt::format("wave at t = {:g}: left slope {:.6f}, ODE residual {:.3e}", wave.t_source, wave.left_slope, residual);
    if (wave.bramson_offset) out << fmt::format(", offset {:.6f}", *wave.bramson_offset);
    out << "\n";
    return kExitPass;
}

// ---------------------------------------------------------------- constants

int cmd_constants(RunContext& ctx, std::ostream& out) {
    const Config& c = ctx.config();
    const std::string s = "constants";
    c.expect_keys(s, {"alphas", "field", "wave", "phi_s_max", "phi_max_truncation"});
    const std::vector<double> alphas = c.get_doubles(s, "alphas");
    std::vector<RegimeParams> params;
    bool need_c1 = false, need_phi = false;
    for (double a : alphas) {
        if (!std::isfinite(a) || a >= 1.0)
            fail(ErrorKind::Configuration, fmt::format("{}: [constants] alpha = {:g} must be finite and below 1", c.source(), a));
        params.push_back(classify_regime(a));
        need_c1 = need_c1 || params.back().regime == Regime::High || params.back().regime == Regime::Critical;
        need_phi = need_phi || params.back().regime == Regime::Low;
    }

    std::optional<double> c1, c2;
    if (need_c1 || c.has(s, "wave")) {
        if (!c.has(s, "wave"))
            fail(ErrorKind::Dependency, "C1 and C2 need a wave artifact: run `bbmlab wave` and set [constants] wave = <wave.csv>");
        const fs::path wp = c.get_path(s, "wave");
        if (!fs::exists(wp))
            fail(ErrorKind::Dependency, fmt::format("wave artifact '{}' not found: produce it with `bbmlab wave`", wp.string()));
        const WaveProfile wave = load_wave(ctx.input(wp));
        c1 = c1_from_wave(wave).value;
        c2 = c2_from_c1(*c1);
    }
    std::optional<SolutionField> field;
    if (need_phi) {
        if (!c.has(s, "field"))
            fail(ErrorKind::Dependency, "Phi(alpha) needs a solver field: run `bbmlab solve` and set [constants] field = <field.csv>");
        field = load_field(ctx.input(c.get_path(s, "field")));
    }
    PhiOptions po;
    po.s_max = c.get_double(s, "phi_s_max", po.s_max);
    po.max_truncation = c.get_double(s, "phi_max_truncation", po.max_truncation);

    std::vector<ConstantsRow> rows;
    int status = kExitPass;
    for (const auto& p : params) {
        ConstantsRow r;
        r.alpha = p.alpha;
        r.regime = std::string(to_string(p.regime));
        r.psi = rate_function(p.alpha);
        r.v_alpha = p.v_alpha;
        r.lambda_alpha = p.lambda_alpha;
        r.c1 = c1;
        r.c2 = c2;
        if (p.regime == Regime::Low) {
            const PhiResult phi = phi_alpha(p.alpha, *field, po);
            r.phi = phi.value;
            r.phi_truncation = phi.truncation;
            if (!(phi.value > -1.0 / p.alpha)) {
                out << fmt::format("check failed: Phi({:g}) = {:.9g} is not above -1/alpha\n", p.alpha, phi.value);
                status = kExitCheckFailure;
            }
        }
        rows.push_back(r);
        out << fmt::format("alpha {:>10.6f}  {:<8}  psi {:>10.6f}", r.alpha, r.regime, r.psi);
        if (r.c1) out << fmt::format("  C1 {:.6f}  C2 {:.6f}", *r.c1, *r.c2);
        if (r.phi) out << fmt::format("  Phi {:.6f} (truncation {:.2e})", *r.phi, *r.phi_truncation);
        out << "\n";
    }
    ctx.write("constants.csv", constants_csv(rows));
    ctx.write("constants.json", constants_json(rows));
    ctx.commit();
    return status;
}

// ---------------------------------------------------------------- predict

const ConstantsRow& row_for(const std::vector<ConstantsRow>& rows, double alpha, const std::string& what) {
    for (const auto& r : rows)
        if (std::abs(r.alpha - alpha) <= 1e-12) return r;
    fail(ErrorKind::Dependency, fmt::format("{}: the constants artifact has no row for alpha = {:g}; rerun `bbmlab constants`", what, alpha));
}

int cmd_predict(RunContext& ctx, std::ostream& out) {
    const Config& c = ctx.config();
    const std::string s = "predict";
    c.expect_keys(s, {"mode", "alpha", "times", "t", "a", "constants", "field"});
    const std::string mode = c.get_choice(s, "mode", {"deviation", "moderate"}, "deviation");
    const auto rows = load_constants(ctx.input(c.get_path(s, "constants")));
    std::optional<SolutionField> field;
    if (c.has(s, "field")) field = load_field(ctx.input(c.get_path(s, "field")));

    std::ostringstream csv;
    if (mode == "deviation") {
        const double alpha = c.get_double(s, "alpha");
        const std::vector<double> times = c.get_doubles(s, "times");
        const ConstantsRow& row = row_for(rows, alpha, c.source());
        const RegimeParams p = classify_regime(alpha);
        const AsymptoticPrediction pred = predict_probability(p, DeviationConstants{row.c1, row.c2, row.phi});
        csv << "t,log_prediction,prediction,log_u_solver,ratio\n";
        for (double t : times) {
            const double lp = pred.log_evaluate(t);
            csv << format_double(t) << "," << format_double(lp) << "," << format_double(std::exp(lp));
            if (field) {
                const double lu = field->evaluate(kSqrt2 * alpha * t, t).logu;
                csv << "," << format_double(lu) << "," << format_double(std::exp(lu - lp));
                out << fmt::format("t {:>6g}  log prediction {:>12.6f}  log u {:>12.6f}  ratio {:.6f}\n", t, lp, lu, std::exp(lu - lp));
            } else {
                csv << ",,";
                out << fmt::format("t {:>6g}  log prediction {:>12.6f}\n", t, lp);
            }
            csv << "\n";
        }
    } else {
        const double t = c.get_double(s, "t");
        const std::vector<double> as = c.get_doubles(s, "a");
        std::optional<double> c1;
        for (const auto& r : rows)
            if (r.c1) c1 = r.c1;
        if (!c1) fail(ErrorKind::Dependency, "moderate predictions need C1: rerun `bbmlab constants` with a wave artifact");
        csv << "a,t,prediction,u_solver,ratio\n";
        for (double a : as) {
            const double pr = predict_moderate(*c1, a);
            csv << format_double(a) << "," << format_double(t) << "," << format_double(pr);
            if (field) {
                const double u = field->evaluate(bramson_centering(t) - a, t).u;
                csv << "," << format_double(u) << "," << format_double(u / pr);
                out << fmt::format("a {:>5g}  prediction {:.6e}  u {:.6e}  ratio {:.6f}\n", a, pr, u, u / pr);
            } else {
                csv << ",,";
                out << fmt::format("a {:>5g}  prediction {:.6e}\n", a, pr);
            }
            csv << "\n";
        }
    }
    ctx.write("prediction.csv", csv.str());
    ctx.commit();
    return kExitPass;
}

// ---------------------------------------------------------------- simulate / condition

sim::SimConfig sim_config(const Config& c, const std::string& s, std::uint64_t seed) {
    sim::SimConfig sc;
    sc.horizon = c.get_double(s, "horizon");
    sc.seed = seed;
    sc.population_cap = c.get_uint(s, "population_cap", sc.population_cap);
    try {
        sim::validate(sc);
    } catch (const Error& e) {
        fail(ErrorKind::Configuration, fmt::format("{}: [{}] {}", c.source(), s, e.what()));
    }
    return sc;
}

std::size_t resolve_shards(const Invocation& inv, const Config& c, const std::string& s) {
    const std::size_t n = inv.shards ? *inv.shards : c.get_uint(s, "shards", 1);
    if (n == 0) fail(ErrorKind::Configuration, "shards must be at least 1");
    return n;
}

ordered interval_json(std::uint64_t k, std::uint64_t n) {
    const Interval w = wilson_interval(k, n);
    return {{"successes", k}, {"n", n}, {"estimate", n ? static_cast<double>(k) / static_cast<double>(n) : 0.0},
            {"lower", w.lower}, {"upper", w.upper}};
}

int cmd_simulate(RunContext& ctx, std::ostream& out) {
    const Config& c = ctx.config();
    const std::string s = "simulate";
    c.expect_keys(s, {"horizon", "replicas", "seed", "shards", "population_cap", "probes", "write_batch"});
    const std::uint64_t seed = resolve_seed(ctx.invocation(), c, s);
    const sim::SimConfig sc = sim_config(c, s, seed);
    const std::uint64_t replicas = c.get_uint(s, "replicas");
    if (replicas == 0) fail(ErrorKind::Configuration, fmt::format("{}: [simulate] replicas must be positive", c.source()));
    const std::size_t shards = resolve_shards(ctx.invocation(), c, s);
    const bool write_batch = c.get_choice(s, "write_batch", {"yes", "no"}, "yes") == "yes";
    std::vector<double> probes;
    if (ctx.invocation().probes) probes = parse_list(*ctx.invocation().probes, "--probes");
    else if (c.has(s, "probes")) probes = c.get_doubles(s, "probes");
    ctx.seed(seed);

    std::vector<sim::Realization> rows;
    std::vector<std::uint64_t> below(probes.size(), 0);
    double sum_n = 0.0, sum_n2 = 0.0, sum_tau = 0.0;
    std::uint64_t done = 0;
    std::optional<sim::PartialStats> partial;
    try {
        sim::for_each_realization(
            sc, 0, replicas,
            [&](const sim::Realization& r) {
                ++done;
                const double n = static_cast<double>(r.n_t);
                sum_n += n;
                sum_n2 += n * n;
                sum_tau += r.root_lifetime;
                for (std::size_t i = 0; i < probes.size(); ++i)
                    if (r.m_t <= probes[i]) ++below[i];
                if (write_batch) rows.push_back(r);
            },
            sim::BatchOptions{.shards = shards});
    } catch (const sim::CappedError& e) {
        partial = e.partial();
        out << e.what() << "\n";
    }

    ordered j;
    j["horizon"] = sc.horizon;
    j["seed"] = seed;
    j["shards"] = shards;
    j["replicas_requested"] = replicas;
    j["replicas"] = done;
    if (done > 0) {
        const double dn = static_cast<double>(done);
        const double mean_n = sum_n / dn;
        j["mean_n_t"] = mean_n;
        j["se_n_t"] = done > 1 ? std::sqrt(std::max(0.0, (sum_n2 - dn * mean_n * mean_n) / (dn - 1.0)) / dn) : 0.0;
        j["expected_mean_n_t"] = std::exp(sc.horizon);
        j["mean_root_lifetime"] = sum_tau / dn;
        auto& pj = j["probabilities"] = ordered::array();
        for (std::size_t i = 0; i < probes.size(); ++i) {
            ordered p = interval_json(below[i], done);
            p["z"] = probes[i];
            pj.push_back(std::move(p));
        }
    }
    if (partial) {
        j["partial"] = {{"replicas_completed", partial->replicas_completed}, {"capped_replica", partial->capped_replica},
                        {"particles_at_cap", partial->particles_at_cap}, {"time_reached", partial->time_reached}};
    }
    if (write_batch) ctx.write("batch.csv", batch_csv(rows));
    ctx.write("summary.json", j.dump(2) + "\n");
    ctx.count("replicas", done);
    ctx.commit();
    if (done > 0) out << fmt::format("{} replicas at t = {:g}: mean n_t {:.6f} (e^t = {:.6f})\n", done, sc.horizon,
                                     j["mean_n_t"].get<double>(), std::exp(sc.horizon));
    for (std::size_t i = 0; i < probes.size() && done > 0; ++i)
        out << fmt::format("P(M_t <= {:g}) = {:.6f}\n", probes[i], static_cast<double>(below[i]) / static_cast<double>(done));
    return partial ? kExitPartial : kExitPass;
}

int cmd_condition(RunContext& ctx, std::ostream& out) {
    const Config& c = ctx.config();
    const std::string s = "condition";
    c.expect_keys(s, {"horizon", "threshold", "alpha", "a", "max_trials", "target", "seed", "shards", "population_cap"});
    const std::uint64_t seed = resolve_seed(ctx.invocation(), c, s);
    const sim::SimConfig sc = sim_config(c, s, seed);
    const int given = static_cast<int>(c.has(s, "threshold")) + static_cast<int>(c.has(s, "alpha")) + static_cast<int>(c.has(s, "a"));
    if (given != 1) fail(ErrorKind::Configuration, fmt::format("{}: [condition] needs exactly one of threshold, alpha, a", c.source()));
    std::string mode = "threshold";
    double threshold = 0.0;
    std::optional<double> alpha, a;
    if (c.has(s, "alpha")) {
        alpha = c.get_double(s, "alpha");
        threshold = kSqrt2 * *alpha * sc.horizon;
        mode = "deviation";
    } else if (c.has(s, "a")) {
        a = c.get_double(s, "a");
        threshold = bramson_centering(sc.horizon) - *a;
        mode = "moderate";
    } else {
        threshold = c.get_double(s, "threshold");
    }
    const std::uint64_t max_trials = c.get_uint(s, "max_trials");
    const std::uint64_t target = c.get_uint(s, "target", 0);
    const std::size_t shards = resolve_shards(ctx.invocation(), c, s);
    ctx.seed(seed);

    sim::ConditionedBatch batch;
    std::optional<sim::PartialStats> partial;
    try {
        batch = sim::simulate_conditioned(sc, threshold, max_trials, target, sim::BatchOptions{.shards = shards});
    } catch (const sim::CappedError& e) {
        partial = e.partial();
        out << e.what() << "\n";
    }

    ordered j;
    j["mode"] = mode;
    j["horizon"] = sc.horizon;
    j["threshold"] = threshold;
    j["alpha"] = alpha ? ordered(*alpha) : ordered(nullptr);
    j["a"] = a ? ordered(*a) : ordered(nullptr);
    j["seed"] = seed;
    j["shards"] = shards;
    j["max_trials"] = max_trials;
    j["target"] = target;
    j["trials"] = batch.trials;
    j["accepted"] = batch.accepted.size();
    j["acceptance_rate"] = interval_json(batch.accepted.size(), batch.trials);
    j["target_reached"] = batch.target_reached;
    j["empty"] = batch.empty;
    if (partial) {
        j["partial"] = {{"replicas_completed", partial->replicas_completed}, {"capped_replica", partial->capped_replica},
                        {"particles_at_cap", partial->particles_at_cap}, {"time_reached", partial->time_reached}};
    }
    ctx.write("batch.csv", batch_csv(batch.accepted));
    ctx.write("summary.json", j.dump(2) + "\n");
    ctx.count("trials", batch.trials);
    ctx.count("accepted", batch.accepted.size());
    ctx.commit();
    const Interval w = wilson_interval(batch.accepted.size(), std::max<std::uint64_t>(batch.trials, 1));
    out << fmt::format("accepted {} of {} trials at threshold {:.6f}: rate {:.6e} [{:.6e}, {:.6e}]\n", batch.accepted.size(),
                       batch.trials, threshold, batch.acceptance_rate, w.lower, w.upper);
    return partial ? kExitPartial : kExitPass;
}

// ---------------------------------------------------------------- verify

const std::set<std::string> kSuites{"rate", "bounds", "ratios", "moderate", "critical", "conditional"};

std::vector<std::string> suites_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        item = b == std::string::npos ? std::string() : item.substr(b, item.find_last_not_of(" \t") - b + 1);
        if (!kSuites.count(item)) fail(ErrorKind::Configuration, fmt::format("unknown suite '{}' (rate|bounds|ratios|moderate|critical|conditional)", item));
        out.push_back(item);
    }
    if (out.empty()) fail(ErrorKind::Configuration, "no suite selected");
    return out;
}

double c1_from(const std::vector<ConstantsRow>& rows) {
    for (const auto& r : rows)
        if (r.c1) return *r.c1;
    fail(ErrorKind::Dependency, "the constants artifact carries no C1: rerun `bbmlab constants` with a wave artifact");
}

int cmd_verify(RunContext& ctx, std::ostream& out) {
    const Config& c = ctx.config();
    const std::string s = "verify";
    c.expect_keys(s, {"suite", "field", "constants", "batch", "alpha_lo", "alpha_hi", "alpha_step", "times", "alpha_high",
                      "alpha_low", "t", "a", "critical_t", "gaussian_times", "ds_times", "ch_times"});
    const auto suites = suites_of(ctx.invocation().suite ? *ctx.invocation().suite : c.get_string(s, "suite"));
    const verify::Tolerances& tol = verify::default_tolerances();

    std::optional<SolutionField> field;
    auto need_field = [&]() -> const SolutionField& {
        if (!field) field = load_field(ctx.input(c.get_path(s, "field")));
        return *field;
    };
    std::optional<std::vector<ConstantsRow>> constants;
    auto need_constants = [&]() -> const std::vector<ConstantsRow>& {
        if (!constants) constants = load_constants(ctx.input(c.get_path(s, "constants")));
        return *constants;
    };

    std::vector<verify::ComparisonReport> reports;
    for (const auto& suite : suites) {
        if (suite == "rate") {
            const double lo = c.get_double(s, "alpha_lo", -2.0);
            const double hi = c.get_double(s, "alpha_hi", 0.9);
            const double step = c.get_double(s, "alpha_step", 0.01);
            if (!(step > 0.0) || !(hi > lo)) fail(ErrorKind::Configuration, "[verify] alpha grid needs alpha_hi > alpha_lo and a positive step");
            std::ostringstream csv;
            csv << "alpha,psi,regime\n";
            double worst = 0.0;
            const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
            for (std::size_t i = 0; i <= n; ++i) {
                const double a = lo + step * static_cast<double>(i);
                const std::string text = format_double(rate_function(a));
                csv << format_double(a) << "," << text << "," << to_string(classify_regime(a).regime) << "\n";
                worst = std::max(worst, std::abs(io::parse_double(text) - rate_function(a)));
            }
            ctx.write("rate_curve.csv", csv.str());
            verify::ComparisonReport r;
            r.name = "rate.curve";
            r.layer = verify::Layer::Numerical;
            r.comparison = verify::Comparison::AtMost;
            r.empirical = worst;
            r.note = "emitted curve against rate_function, pointwise";
            reports.push_back(verify::finalize(r));
        } else if (suite == "bounds") {
            verify::BoundAuditOptions bo;
            if (c.has(s, "gaussian_times")) bo.gaussian_times = c.get_doubles(s, "gaussian_times");
            if (c.has(s, "ds_times")) bo.ds_times = c.get_doubles(s, "ds_times");
            if (c.has(s, "ch_times")) bo.ch_times = c.get_doubles(s, "ch_times");
            auto b = verify::bound_audit(need_field(), bo, tol);
            reports.insert(reports.end(), b.begin(), b.end());
        } else if (suite == "ratios") {
            const auto& rows = need_constants();
            const std::vector<double> times = c.has(s, "times") ? c.get_doubles(s, "times") : std::vector<double>{20.0, 30.0, 40.0};
            const double ah = c.get_double(s, "alpha_high", 0.0);
            const double al = c.get_double(s, "alpha_low", -1.0);
            const double c1 = c1_from(rows);
            const ConstantsRow& low = row_for(rows, al, c.source());
            if (!low.phi) fail(ErrorKind::Dependency, fmt::format("no Phi for alpha = {:g} in the constants artifact", al));
            const auto hs = verify::ratio_diagnostic_high(need_field(), ah, c1, times, {tol.ratio_lo, tol.ratio_hi}, tol);
            const auto cs = verify::ratio_diagnostic_critical(need_field(), c2_from_c1(c1), times, {tol.ratio_lo, tol.ratio_hi}, tol);
            const auto ls = verify::ratio_diagnostic_low(need_field(), al, *low.phi, times, {tol.ratio_lo, tol.ratio_hi}, tol);
            std::ostringstream csv;
            csv << "regime,alpha,t,log_u,R\n";
            const std::pair<const char*, const verify::RatioSeries*> series[] = {{"high", &hs}, {"critical", &cs}, {"low", &ls}};
            const double alphas[] = {ah, -kGamma, al};
            for (std::size_t k = 0; k < 3; ++k) {
                const auto& [name, rs] = series[k];
                for (std::size_t i = 0; i < rs->times.size(); ++i)
                    csv << name << "," << format_double(alphas[k]) << "," << format_double(rs->times[i]) << ","
                        << format_double(rs->log_u[i]) << "," << format_double(rs->ratios[i]) << "\n";
                reports.insert(reports.end(), rs->reports.begin(), rs->reports.end());
            }
            ctx.write("ratios.csv", csv.str());
        } else if (suite == "moderate") {
            const double t = c.get_double(s, "t", 40.0);
            const std::vector<double> as = c.has(s, "a") ? c.get_doubles(s, "a") : std::vector<double>{5.0, 6.0, 7.0};
            auto m = verify::moderate_deviation_check(need_field(), c1_from(need_constants()), t, as, tol);
            reports.insert(reports.end(), m.begin(), m.end());
        } else if (suite == "critical") {
            const auto p = verify::critical_profile_check(need_field(), c.get_double(s, "critical_t", 40.0), tol);
            std::ostringstream csv;
            csv << "x,density,limit\n";
            for (std::size_t i = 0; i < p.x.size(); ++i)
                csv << format_double(p.x[i]) << "," << format_double(p.density[i]) << "," << format_double(p.limit[i]) << "\n";
            ctx.write("critical_profile.csv", csv.str());
            reports.push_back(p.report);
        } else if (suite == "conditional") {
            const fs::path batch_path = ctx.input(c.get_path(s, "batch"));
            const fs::path summary_path = ctx.input(batch_path.parent_path() / "summary.json");
            const auto summary = nlohmann::json::parse(io::read_file(summary_path));
            sim::ConditionedBatch batch;
            batch.accepted = load_batch(batch_path);
            batch.threshold = summary.at("threshold").get<double>();
            batch.trials = summary.at("trials").get<std::uint64_t>();
            batch.empty = batch.accepted.empty();
            verify::ConditionalSuiteInput in;
            in.t = summary.at("horizon").get<double>();
            in.seed = summary.at("seed").get<std::uint64_t>();
            const std::string mode = summary.at("mode").get<std::string>();
            if (mode == "deviation") {
                in.alpha = summary.at("alpha").get<double>();
                if (c.has(s, "constants")) {
                    for (const auto& r : need_constants())
                        if (std::abs(r.alpha - in.alpha) <= 1e-12 && r.phi) in.phi = r.phi;
                }
            } else if (mode == "moderate") {
                in.mode = verify::ConditioningMode::Moderate;
                in.a = summary.at("a").get<double>();
            } else {
                fail(ErrorKind::Configuration, "the conditional suite needs a batch conditioned by alpha or a");
            }
            auto r = verify::conditional_law_suite(need_field(), batch, in, tol);
            reports.insert(reports.end(), r.begin(), r.end());

            const auto cf = conditional_first_branch(need_field(), batch.threshold, in.t);
            std::ostringstream csv;
            csv << "s,density\n";
            const auto g = cf.s_marginal.grid();
            const auto v = cf.s_marginal.values();
            for (std::size_t i = 0; i < g.size(); ++i) csv << format_double(g[i]) << "," << format_double(v[i]) << "\n";
            csv << "atom," << format_double(cf.atom) << "\n";
            ctx.write("conditional_density.csv", csv.str());
        }
    }
    verify::order_by_name(reports);
    std::string joined;
    for (const auto& x : suites) joined += (joined.empty() ? "" : ",") + x;
    ctx.write("report.json", verify::to_json(reports, joined, tol.version, false));
    ctx.write("report.txt", verify::to_text(reports));
    ctx.write("tolerances.json", verify::to_json(tol));
    ctx.commit();
    out << verify::to_text(reports);
    const bool ok = verify::all_pass(reports);
    out << (ok ? "verify: pass\n" : "verify: FAIL\n");
    return ok ? kExitPass : kExitCheckFailure;
}

int dispatch(RunContext& ctx, std::ostream& out) {
    const std::string& cmd = ctx.invocation().command;
    if (cmd == "solve") return cmd_solve(ctx, out);
    if (cmd == "wave") return cmd_wave(ctx, out);
    if (cmd == "constants") return cmd_constants(ctx, out);
    if (cmd == "predict") return cmd_predict(ctx, out);
    if (cmd == "simulate") return cmd_simulate(ctx, out);
    if (cmd == "condition") return cmd_condition(ctx, out);
    if (cmd == "verify") return cmd_verify(ctx, out);
    fail(ErrorKind::Configuration, fmt::format("unknown command '{}'", cmd));
}

int run_with_config(const Invocation& inv, const Config& config, const std::string& text, std::ostream& out) {
    if (inv.out_dir.empty()) fail(ErrorKind::Configuration, "--out-dir is required");
    RunContext ctx(inv, config, text);
    return dispatch(ctx, out);
}

int cmd_replay(const Invocation& inv, std::ostream& out) {
    if (!inv.manifest) fail(ErrorKind::Configuration, "replay needs a manifest path");
    if (inv.out_dir.empty()) fail(ErrorKind::Configuration, "--out-dir is required");
    const RunManifest m = load_manifest(*inv.manifest);
    if (m.tool_version != kToolVersion)
        fail(ErrorKind::Integrity, fmt::format("manifest was written by '{}', this is '{}'", m.tool_version, kToolVersion));
    if (io::sha256_hex(m.config_text) != m.config_sha256) fail(ErrorKind::Integrity, "manifest config text does not match its digest");
    for (const auto& r : m.inputs) {
        if (!fs::exists(r.path)) fail(ErrorKind::Integrity, fmt::format("replay input '{}' is missing", r.path));
        if (io::sha256_file(r.path) != r.sha256) fail(ErrorKind::Integrity, fmt::format("replay input '{}' changed since the run", r.path));
    }
    const fs::path original_dir = inv.manifest->parent_path();
    if (fs::exists(inv.out_dir) && fs::equivalent(fs::absolute(inv.out_dir), fs::absolute(original_dir)))
        fail(ErrorKind::Configuration, "replay --out-dir must differ from the manifest's directory");

    Invocation again;
    again.command = m.command;
    again.out_dir = inv.out_dir;
    if (auto it = m.flags.find("seed"); it != m.flags.end()) again.seed = std::stoull(it->second);
    if (auto it = m.flags.find("shards"); it != m.flags.end()) again.shards = std::stoull(it->second);
    if (auto it = m.flags.find("probes"); it != m.flags.end()) again.probes = it->second;
    if (auto it = m.flags.find("suite"); it != m.flags.end()) again.suite = it->second;
    Config config = Config::parse(m.config_text, inv.manifest->string() + "#config");
    config.set_base_dir(m.config_dir);

    std::ostringstream sink;
    const int code = run_with_config(again, config, m.config_text, sink);
    const RunManifest fresh = load_manifest(inv.out_dir / kManifestName);

    std::map<std::string, std::string> now;
    for (const auto& r : fresh.outputs) now[r.path] = r.sha256;
    ordered j;
    j["manifest"] = fs::absolute(*inv.manifest).string();
    j["command"] = m.command;
    j["exit_code"] = code;
    auto& list = j["artifacts"] = ordered::array();
    bool identical = now.size() == m.outputs.size();
    for (const auto& r : m.outputs) {
        const auto it = now.find(r.path);
        const bool same = it != now.end() && it->second == r.sha256;
        identical = identical && same;
        list.push_back({{"path", r.path}, {"expected", r.sha256}, {"replayed", it == now.end() ? "" : it->second}, {"identical", same}});
        out << fmt::format("{:<28} {}\n", r.path, same ? "identical" : "DIFFERS");
    }
    j["identical"] = identical;
    io::write_atomic(inv.out_dir / "replay.json", j.dump(2) + "\n");
    out << (identical ? "replay: byte-identical\n" : "replay: outputs differ\n");
    return identical ? kExitPass : kExitCheckFailure;
}

}  // namespace

int execute(const Invocation& inv, std::ostream& out) {
    if (inv.command == "replay") return cmd_replay(inv, out);
    if (!inv.config) fail(ErrorKind::Configuration, fmt::format("{} needs --config", inv.command));
    const Config config = Config::load(*inv.config);
    return run_with_config(inv, config, io::read_file(*inv.config), out);
}

}  // namespace bbm::cli
