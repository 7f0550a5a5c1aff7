// qdb: quantum distinguishability bounds workbench.
//
// Commands: fisher, divergence, discriminate, figures, selftest.
// Exit codes: 0 success, 1 invariant failure, 2 input error, 3 numerical
// failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdb/bounds.hpp"
#include "qdb/descriptor.hpp"
#include "qdb/divergences.hpp"
#include "qdb/fisher.hpp"
#include "qdb/sdp.hpp"
#include "qdb/selftest.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace qdb;

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void apply_env_tolerances() {
    auto read = [](const char* name, double& slot) {
        if (const char* v = std::getenv(name)) {
            char* end = nullptr;
            double parsed = std::strtod(v, &end);
            if (end != v && parsed > 0) slot = parsed;
        }
    };
    Tolerances& t = tolerances();
    read("QDB_TOL_RANK", t.rank_rel);
    read("QDB_TOL_FINITENESS", t.finiteness_rel);
    read("QDB_TOL_SDP", t.sdp);
    read("QDB_TOL_CONSISTENCY", t.consistency);
}

json value_json(const ExtReal& v) {
    if (v.is_inf()) return json("inf");
    return json(v.value());
}

ChannelDescriptor parse_or_throw(const std::string& text) {
    try {
        return parse_channel_descriptor(text);
    } catch (const DescriptorError& e) {
        throw InputError(e.what());
    }
}

long elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

int cmd_fisher(const std::string& channel_json, const std::string& quantity,
               const std::string& methods_csv, double theta, bool theta_set, double delta) {
    ChannelDescriptor desc = parse_or_throw(channel_json);
    if (quantity != "rld-channel" && quantity != "sld-channel")
        throw InputError("fisher: --quantity must be rld-channel or sld-channel");
    ChannelFamily fam;
    double th = 0.0;
    if (desc.family) {
        fam = *desc.family;
        th = theta_set ? theta : desc.theta;
    } else {
        // A fixed channel is a constant family in theta.
        Choi fixed = desc.choi;
        fam.eval = [fixed](double) { return fixed; };
        fam.deriv_fn = [fixed](double) {
            return Mat(Mat::Zero(fixed.op.rows(), fixed.op.cols()));
        };
        fam.dim_in = fixed.dim_in;
        fam.dim_out = fixed.dim_out;
        th = theta_set ? theta : 0.0;
    }

    std::vector<std::string> methods = split_list(methods_csv);
    if (methods.empty()) methods = {"closed"};

    json results = json::object();
    std::vector<double> finite_values;
    bool any_inf = false;
    for (const std::string& m : methods) {
        auto start = std::chrono::steady_clock::now();
        json entry;
        if (quantity == "rld-channel") {
            if (m == "closed") {
                FisherResult r = rld_channel(fam, th);
                entry["value"] = value_json(r.value);
                entry["finiteness_residual"] = r.finiteness.residual;
                if (r.value.is_inf()) any_inf = true;
                else finite_values.push_back(r.value.value());
            } else if (m == "sdp") {
                ExtReal v = sdp::rld_channel_sdp(fam, th);
                entry["value"] = value_json(v);
                FinitenessReport rep =
                    finiteness_report(fam.at(th).op, fam.deriv_at(th), FisherKind::rld);
                entry["finiteness_residual"] = rep.residual;
                if (v.is_inf()) any_inf = true;
                else finite_values.push_back(v.value());
            } else {
                throw InputError("fisher: rld-channel methods are closed|sdp");
            }
        } else {
            FinitenessReport rep =
                finiteness_report(fam.at(th).op, fam.deriv_at(th), FisherKind::sld);
            if (m == "limit") {
                LimitEstimate e = sld_channel_limit(fam, th, delta);
                entry["value"] = e.value;
                entry["delta"] = e.delta;
                entry["richardson"] = e.richardson;
                finite_values.push_back(e.value);
            } else if (m == "seesaw") {
                sdp::SeesawResult r = sdp::sld_channel_seesaw(fam, th);
                entry["value"] = value_json(r.lower_bound);
                entry["iterations"] = r.iterations;
                entry["converged"] = r.converged;
                if (r.lower_bound.is_inf()) any_inf = true;
                else finite_values.push_back(r.lower_bound.value());
            } else {
                throw InputError("fisher: sld-channel methods are limit|seesaw");
            }
            entry["finiteness_residual"] = rep.residual;
        }
        entry["runtime_ms"] = elapsed_ms(start);
        results[m] = entry;
    }

    json out;
    out["quantity"] = quantity;
    out["theta"] = th;
    if (methods.size() == 1) {
        out["method"] = methods[0];
        for (auto& [k, v] : results[methods[0]].items()) out[k] = v;
    } else {
        out["methods"] = results;
        double max_delta = 0.0;
        for (size_t i = 1; i < finite_values.size(); ++i)
            max_delta = std::max(max_delta, std::abs(finite_values[i] - finite_values[0]));
        out["max_delta"] = max_delta;
        out["consistent"] =
            !any_inf || finite_values.empty()
                ? json(max_delta <=
                       tolerances().consistency * (1.0 + (finite_values.empty()
                                                              ? 0.0
                                                              : std::abs(finite_values[0]))))
                : json(false);
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_divergence(const std::string& a_json, const std::string& b_json,
                   const std::string& quantity, double alpha, bool alpha_set) {
    ChannelDescriptor a = parse_or_throw(a_json);
    ChannelDescriptor b = parse_or_throw(b_json);
    json out;
    out["quantity"] = quantity;
    auto start = std::chrono::steady_clock::now();
    if (quantity == "geometric-renyi") {
        if (!alpha_set) throw InputError("divergence: --alpha is required for geometric-renyi");
        if (alpha == 1.0) {
            ExtReal v = bs_channel(a.choi, b.choi);
            out["value"] = value_json(v);
            out["note"] = "alpha = 1 routed to the Belavkin-Staszewski channel divergence";
        } else {
            if (!((alpha > 0 && alpha < 1) || (alpha > 1 && alpha <= 2)))
                throw InputError("divergence: alpha outside data-processing interval (0,1) u (1,2]");
            DivergenceValue v = geometric_renyi_channel(a.choi, b.choi, alpha);
            out["alpha"] = alpha;
            out["value"] = value_json(v.value);
            out["support_case"] = v.support_case == SupportCase::contained
                                      ? "contained"
                                      : (v.support_case == SupportCase::tilde_reduced
                                             ? "tilde-reduced"
                                             : "infinite");
            if (std::abs(alpha - 1.0) < 1e-3)
                out["note"] = "alpha near 1: value may be ill-conditioned";
        }
    } else if (quantity == "bs") {
        out["value"] = value_json(bs_channel(a.choi, b.choi));
    } else if (quantity == "geometric-fidelity") {
        double v = sdp::geo_fidelity_channel_sdp(a.choi, b.choi);
        out["value"] = v * v;
        out["root_value"] = v;
    } else if (quantity == "root-fidelity") {
        out["value"] = sdp::root_fidelity_channel_sdp(a.choi, b.choi);
    } else {
        throw InputError(
            "divergence: --quantity must be geometric-renyi|bs|geometric-fidelity|root-fidelity");
    }
    out["runtime_ms"] = elapsed_ms(start);
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_discriminate(const std::string& a_json, const std::string& b_json, long n, double prior,
                     double rate, bool rate_set) {
    ChannelDescriptor a = parse_or_throw(a_json);
    ChannelDescriptor b = parse_or_throw(b_json);
    if (!(prior > 0 && prior < 1)) throw InputError("discriminate: --prior must lie in (0,1)");
    if (n < 1) throw InputError("discriminate: --n must be >= 1");
    json out;
    auto start = std::chrono::steady_clock::now();
    out["chernoff_lower"] = chernoff_lower(a.choi, b.choi);
    out["geometric_chernoff_upper"] = geometric_chernoff_upper(a.choi, b.choi);
    out["nonasymptotic_upper"] = chernoff_nonasymptotic_upper(a.choi, b.choi, n, prior);
    out["n"] = n;
    out["prior"] = prior;
    if (rate_set) {
        HoeffdingBound h = hoeffding_upper(a.choi, b.choi, rate);
        out["hoeffding_upper"] = value_json(h.value);
        if (h.clamped) out["hoeffding_note"] = h.note;
        if (h.value.is_inf()) out["hoeffding_note"] = h.note;
        out["rate"] = rate;
    }
    out["runtime_ms"] = elapsed_ms(start);
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

FigureConfig parse_figure_config(const std::string& name, double gamma, double noise, double phi,
                                 const std::string& grid, double gamma2, double noise2, long n,
                                 bool fix_noise_pair) {
    FigureConfig cfg;
    if (name == "estimate-loss") cfg.kind = FigureKind::estimate_loss;
    else if (name == "estimate-noise") cfg.kind = FigureKind::estimate_noise;
    else if (name == "estimate-phase") cfg.kind = FigureKind::estimate_phase;
    else if (name == "ch-disc") cfg.kind = FigureKind::ch_disc;
    else throw InputError("figures: --name must be estimate-loss|estimate-noise|estimate-phase|ch-disc");
    cfg.gamma = gamma;
    cfg.noise = noise;
    cfg.phi = phi;
    cfg.gamma1 = gamma;
    cfg.gamma2 = gamma2;
    cfg.noise1 = noise;
    cfg.noise2 = noise2;
    cfg.fix_loss = !fix_noise_pair;
    cfg.n_uses = n;
    std::vector<std::string> parts = split_list(grid);
    {
        std::vector<std::string> colon;
        std::stringstream ss(grid);
        std::string item;
        while (std::getline(ss, item, ':')) colon.push_back(item);
        if (colon.size() != 3) throw InputError("figures: --grid must be lo:hi:step");
        try {
            cfg.grid_lo = std::stod(colon[0]);
            cfg.grid_hi = std::stod(colon[1]);
            cfg.grid_step = std::stod(colon[2]);
        } catch (...) {
            throw InputError("figures: --grid must be numeric lo:hi:step");
        }
    }
    if (!(cfg.grid_lo > 0 && cfg.grid_hi < 1 && cfg.grid_step > 0))
        throw InputError("figures: grid must stay inside (0,1)");
    return cfg;
}

int cmd_figures(const FigureConfig& cfg, const std::string& out_path) {
    namespace fs = std::filesystem;
    fs::path target(out_path);
    fs::path tmp = target;
    tmp += ".tmp";
    try {
        FigureData data = figure_data(cfg);
        if (cfg.kind == FigureKind::ch_disc) {
            for (const auto& row : data.rows)
                if (row[4] < -1e-6)
                    throw NumericalError("figures: negative upper-lower gap in ch-disc data");
        }
        std::ofstream os(tmp);
        if (!os) throw InputError("figures: cannot open output file " + out_path);
        os << to_csv(data);
        os.close();
        fs::rename(tmp, target);
        if (cfg.kind == FigureKind::estimate_loss && std::abs(cfg.noise - 0.5) < 1e-12) {
            double worst = 0.0;
            for (const auto& row : data.rows)
                worst = std::max(worst,
                                 std::abs(std::exp(-row[1]) - std::exp(-row[2])) /
                                     std::exp(-row[1]));
            std::cout << "coincidence check at N=1/2: max relative deviation " << worst
                      << (worst <= 1e-3 ? " (within 1e-3)" : " (EXCEEDS 1e-3)") << "\n";
            if (worst > 1e-3) {
                std::error_code ec;
                fs::remove(target, ec);
                return kExitNumerical;
            }
        }
    } catch (const InputError&) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    } catch (const std::exception& e) {
        std::error_code ec;
        fs::remove(tmp, ec);
        std::cerr << "figures: grid-point failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_selftest(std::uint64_t seed, int trials) {
    selftest::Report rep = selftest::run_all(seed, trials);
    std::cout << selftest::format_report(rep, seed, trials);
    return rep.all_pass ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    apply_env_tolerances();

    CLI::App app{"quantum distinguishability bounds workbench"};
    app.require_subcommand(1);

    // tolerance flags beat the QDB_TOL_* environment overrides
    double tol_rank = -1, tol_fin = -1, tol_sdp = -1, tol_cons = -1;
    app.add_option("--tol-rank", tol_rank, "kernel-cut tolerance factor");
    app.add_option("--tol-finiteness", tol_fin, "finiteness residual tolerance");
    app.add_option("--tol-sdp", tol_sdp, "interior-point duality gap tolerance");
    app.add_option("--tol-consistency", tol_cons, "cross-method agreement tolerance");

    // fisher
    auto* fisher_cmd = app.add_subcommand("fisher", "Fisher information of a channel family");
    std::string f_channel, f_quantity = "rld-channel", f_methods = "closed";
    double f_theta = 0.0, f_delta = 1e-3;
    bool f_theta_set = false;
    fisher_cmd->add_option("--channel", f_channel, "channel descriptor JSON")->required();
    fisher_cmd->add_option("--quantity", f_quantity, "rld-channel|sld-channel");
    fisher_cmd->add_option("--method", f_methods, "comma list: closed,sdp (rld) / limit,seesaw (sld)");
    fisher_cmd->add_option("--theta", f_theta, "family parameter value")
        ->each([&](const std::string&) { f_theta_set = true; });
    fisher_cmd->add_option("--delta", f_delta, "shift for the limit estimator");

    // divergence
    auto* div_cmd = app.add_subcommand("divergence", "channel divergences");
    std::string d_a, d_b, d_quantity = "geometric-renyi";
    double d_alpha = 0.0;
    bool d_alpha_set = false;
    div_cmd->add_option("--channel", d_a, "first channel descriptor JSON")->required();
    div_cmd->add_option("--channel2", d_b, "second channel descriptor JSON")->required();
    div_cmd->add_option("--quantity", d_quantity,
                        "geometric-renyi|bs|geometric-fidelity|root-fidelity");
    div_cmd->add_option("--alpha", d_alpha, "Renyi parameter")
        ->each([&](const std::string&) { d_alpha_set = true; });

    // discriminate
    auto* disc_cmd = app.add_subcommand("discriminate", "channel discrimination bounds");
    std::string c_a, c_b;
    long c_n = 1;
    double c_prior = 0.5, c_rate = 0.0;
    bool c_rate_set = false;
    disc_cmd->add_option("--channel", c_a, "first channel descriptor JSON")->required();
    disc_cmd->add_option("--channel2", c_b, "second channel descriptor JSON")->required();
    disc_cmd->add_option("--n", c_n, "number of channel uses");
    disc_cmd->add_option("--prior", c_prior, "prior probability of the first channel");
    disc_cmd->add_option("--rate", c_rate, "type-II rate for the Hoeffding bound")
        ->each([&](const std::string&) { c_rate_set = true; });

    // figures
    auto* fig_cmd = app.add_subcommand("figures", "sweep data as CSV");
    std::string g_name, g_grid = "0.1:0.9:0.1", g_out = "figure.csv";
    double g_gamma = 0.5, g_noise = 0.2, g_phi = 0.1, g_gamma2 = 0.7, g_noise2 = 0.2;
    long g_n = 1;
    bool g_fix_noise = false;
    fig_cmd->add_option("--name", g_name, "estimate-loss|estimate-noise|estimate-phase|ch-disc")
        ->required();
    fig_cmd->add_option("--gamma", g_gamma, "fixed loss (or first loss for ch-disc)");
    fig_cmd->add_option("--N", g_noise, "fixed noise (or first noise for ch-disc)");
    fig_cmd->add_option("--phi", g_phi, "phase evaluation point");
    fig_cmd->add_option("--gamma2", g_gamma2, "second loss for ch-disc");
    fig_cmd->add_option("--N2", g_noise2, "second noise for ch-disc");
    fig_cmd->add_flag("--fix-noise", g_fix_noise, "ch-disc: fix the noise pair, sweep losses");
    fig_cmd->add_option("--grid", g_grid, "lo:hi:step");
    fig_cmd->add_option("--n", g_n, "channel uses in the variance bounds");
    fig_cmd->add_option("--out", g_out, "output CSV path");

    // selftest
    auto* self_cmd = app.add_subcommand("selftest", "run the invariant suites");
    std::uint64_t s_seed = 20240817;
    int s_trials = 20;
    self_cmd->add_option("--seed", s_seed, "RNG seed");
    self_cmd->add_option("--trials", s_trials, "trials per invariant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (tol_rank > 0) tolerances().rank_rel = tol_rank;
    if (tol_fin > 0) tolerances().finiteness_rel = tol_fin;
    if (tol_sdp > 0) tolerances().sdp = tol_sdp;
    if (tol_cons > 0) tolerances().consistency = tol_cons;

    try {
        if (fisher_cmd->parsed())
            return cmd_fisher(f_channel, f_quantity, f_methods, f_theta, f_theta_set, f_delta);
        if (div_cmd->parsed()) return cmd_divergence(d_a, d_b, d_quantity, d_alpha, d_alpha_set);
        if (disc_cmd->parsed())
            return cmd_discriminate(c_a, c_b, c_n, c_prior, c_rate, c_rate_set);
        if (fig_cmd->parsed()) {
            FigureConfig cfg = parse_figure_config(g_name, g_gamma, g_noise, g_phi, g_grid,
                                                   g_gamma2, g_noise2, g_n, g_fix_noise);
            return cmd_figures(cfg, g_out);
        }
        if (self_cmd->parsed()) return cmd_selftest(s_seed, s_trials);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DescriptorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const BadAlphaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParamOutOfRangeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitInput;
}
