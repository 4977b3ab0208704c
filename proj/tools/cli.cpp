#include "cli.hpp"

#include "reference_values.hpp"

#include "fsard/analysis.hpp"
#include "fsard/error.hpp"
#include "fsard/optimizer.hpp"
#include "fsard/rng.hpp"
#include "fsard/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fsard::cli {

namespace {

constexpr double kRangeSlack = 1e-9;

std::string_view to_string(Command command) {
    switch (command) {
    case Command::analyze: return "analyze";
    case Command::simulate: return "simulate";
    case Command::optimize: return "optimize";
    case Command::reproduce: return "reproduce";
    }
    return "?";
}

std::string trim(const std::string &text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    return text.substr(first, text.find_last_not_of(" \t") - first + 1);
}

std::vector<std::string> split(const std::string &text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, sep)) parts.push_back(trim(part));
    return parts;
}

double parse_real(const std::string &text, const std::string &parameter) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used == text.size()) return value;
    } catch (const std::exception &) {
    }
    throw ConfigError(parameter, fmt::format("cannot parse '{}' as a number", text));
}

long long parse_integer(const std::string &text, const std::string &parameter) {
    try {
        std::size_t used = 0;
        const long long value = std::stoll(text, &used);
        if (used == text.size()) return value;
    } catch (const std::exception &) {
    }
    throw ConfigError(parameter, fmt::format("cannot parse '{}' as an integer", text));
}

template <class T>
void normalize(std::vector<T> &values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
}

std::vector<double> json_reals(const Json &value, const std::string &key) {
    if (value.is_string()) return parse_real_range(value.get<std::string>(), key);
    if (value.is_number()) return {value.get<double>()};
    if (value.is_array()) {
        std::vector<double> out;
        for (const auto &v : value) {
            if (!v.is_number()) throw ConfigError(key, "list entries must be numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    throw ConfigError(key, "expected a number, a list, or a range string");
}

std::vector<int> json_ints(const Json &value, const std::string &key) {
    if (value.is_string()) return parse_int_range(value.get<std::string>(), key);
    std::vector<int> out;
    for (double v : json_reals(value, key)) {
        if (v != std::floor(v)) throw ConfigError(key, fmt::format("{} is not an integer", v));
        out.push_back(static_cast<int>(v));
    }
    return out;
}

/// Primary output: spec.out when set, the given stream otherwise.
class Sink {
public:
    Sink(const std::string &path, std::ostream &fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
            stream_ = &file_;
        }
    }
    std::ostream &operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream *stream_;
};

std::string path_stem(const std::string &out, const std::string &fallback) {
    if (out.empty() || out == "-") return fallback;
    const std::filesystem::path p(out);
    return (p.parent_path() / p.stem()).string();
}

void ensure_seed(ExperimentSpec &spec, std::ostream &log) {
    if (spec.seed) return;
    spec.seed = generate_seed();
    log << "seed: " << *spec.seed << '\n';
}

Json json_document(const ExperimentSpec &spec) {
    return Json{{"format", "fsard-json v1"}, {"version", std::string(library_version())}, {"spec", spec.to_json()}};
}

void write_search_rows(std::ostream &out, Scheme scheme, int users, int v, double rho, const OptimizationResult &r) {
    for (const auto &point : r.trace) write_csv_line(out, search_csv_row(scheme, users, v, rho, point));
}

// ---- reproduction helpers ----

struct Check {
    bool pass;
    std::string line;
};

class CheckList {
public:
    void add(bool pass, std::string what) { checks_.push_back({pass, std::move(what)}); }

    bool all_passed() const {
        return std::all_of(checks_.begin(), checks_.end(), [](const Check &c) { return c.pass; });
    }

    void write(std::ostream &out) const {
        int failed = 0;
        for (const auto &c : checks_) {
            out << (c.pass ? "PASS " : "FAIL ") << c.line << '\n';
            failed += c.pass ? 0 : 1;
        }
        out << fmt::format("{} checks, {} passed, {} failed\n", checks_.size(), checks_.size() - failed, failed);
    }

private:
    std::vector<Check> checks_;
};

double relative_error(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    return out;
}

int finish_reproduce(const ExperimentSpec &spec, const CheckList &checks, const std::filesystem::path &dir,
                     std::ostream &out) {
    auto summary = open_output(dir / (spec.target + "-summary.txt"));
    summary << "# " << spec.to_json().dump() << '\n';
    checks.write(summary);
    checks.write(out);
    return checks.all_passed() ? ExitCode::ok : ExitCode::checks_failed;
}

void reproduce_fig3(ExperimentSpec &spec, const std::filesystem::path &dir, CheckList &checks, std::ostream &log) {
    struct Panel {
        const char *name;
        Scheme scheme;
        int users, mini_slots;
    };
    const Panel panels[] = {{"a", Scheme::fsa_rd, 30, 4},
                            {"b", Scheme::fsa_rd_one, 30, 4},
                            {"c", Scheme::fsa_rd, 50, 6},
                            {"d", Scheme::fsa_rd_one, 50, 6}};
    const int reps = *spec.replications;

    auto csv = open_output(dir / "fig3.csv");
    write_csv_preamble(csv, spec.to_json());
    write_csv_line(csv, {"panel", "scheme", "N", "V", "M", "rho", "gamma", "analytic", "upper_bound", "simulated",
                         "sim_halfwidth", "rel_error"});
    for (const auto &panel : panels) {
        for (int m : {2, 3}) {
            for (double rho : {0.04, 0.1}) {
                for (int k = 1; k <= 20; ++k) {
                    const double gamma = k / 20.0;
                    const ProtocolConfig config{panel.users, m, panel.mini_slots, rho, gamma};
                    const auto report = panel.scheme == Scheme::fsa_rd ? aaoi_fsa_rd(config) : aaoi_fsa_rd_one(config);
                    std::vector<std::string> row{panel.name,
                                                 std::string(fsard::to_string(panel.scheme)),
                                                 std::to_string(panel.users),
                                                 std::to_string(panel.mini_slots),
                                                 std::to_string(m),
                                                 format_number(rho),
                                                 format_number(gamma),
                                                 format_number(report.aaoi),
                                                 report.upper_bound ? format_number(*report.upper_bound) : ""};
                    if (!spec.analytic_only && k % 2 == 0) {
                        const auto scheme = SchemeSpec::framed(panel.scheme, config);
                        const auto sim = simulate_replications(scheme, spec.horizon,
                                                               spec.warmup.value_or(default_warmup(scheme)),
                                                               *spec.seed, reps, {}, default_workers());
                        const double err = relative_error(sim.mean_aaoi, report.aaoi);
                        row.insert(row.end(), {format_number(sim.mean_aaoi), format_number(sim.ci_halfwidth),
                                               format_number(err)});
                        checks.add(err <= 0.02, fmt::format("fig3{} M={} rho={} gamma={}: simulated {:.4f} vs "
                                                            "analytic {:.4f} (rel {:.4f}, tol 0.02)",
                                                            panel.name, m, rho, gamma, sim.mean_aaoi, report.aaoi, err));
                        log << '.' << std::flush;
                    } else {
                        row.insert(row.end(), {"", "", ""});
                    }
                    write_csv_line(csv, row);
                }
            }
        }
    }
    if (!spec.analytic_only) log << '\n';
}

void reproduce_fig4(ExperimentSpec &spec, const std::filesystem::path &dir, CheckList &checks) {
    constexpr int users = 50;
    {
        constexpr int m = 3, v = 4;
        auto csv = open_output(dir / "fig4a.csv");
        write_csv_preamble(csv, spec.to_json());
        write_csv_line(csv, {"N", "V", "M", "rho", "gamma", "collision_free_x_gamma", "one_shot_x_gamma"});
        for (double rho : {0.02, 0.04, 0.1}) {
            const double target = near_optimal_gamma(users, v, m, rho);
            double best_free = 0, best_free_gamma = 0, best_one = 0, best_one_gamma = 0;
            for (int k = 1; k <= 100; ++k) {
                const double gamma = k / 100.0;
                const ProtocolConfig config{users, m, v, rho, gamma};
                const double free = collision_free_prob(config) * gamma;
                const double one = p_success_fsa_rd_one(config).p_success * gamma;
                if (free > best_free) best_free = free, best_free_gamma = gamma;
                if (one > best_one) best_one = one, best_one_gamma = gamma;
                write_csv_line(csv, {std::to_string(users), std::to_string(v), std::to_string(m), format_number(rho),
                                     format_number(gamma), format_number(free), format_number(one)});
            }
            checks.add(std::abs(best_free_gamma - target) <= 0.01 + kRangeSlack,
                       fmt::format("fig4a rho={}: collision-free curve peaks at gamma={:.2f}, near-optimal gamma "
                                   "{:.4f} (tol 0.01); one-shot curve peaks at {:.2f}",
                                   rho, best_free_gamma, target, best_one_gamma));
        }
    }

    auto csv = open_output(dir / "fig4b.csv");
    write_csv_preamble(csv, spec.to_json());
    write_csv_line(csv, {"N", "V", "rho", "rule_M", "rule_gamma", "rule_aaoi", "search_M", "search_gamma",
                         "search_aaoi", "gap"});
    std::vector<double> fine;
    for (int k = 1; k <= 200; ++k) fine.push_back(k / 200.0);
    for (int v : {4, 6, 8}) {
        for (int r = 1; r <= 10; ++r) {
            const double rho = r / 100.0;
            const auto rule = optimize_fsa_rd_one(users, v, rho);
            const auto search = optimize_fsa_rd_one_grid(users, v, rho, fine, {true, default_workers()});
            const double gap = rule.best_aaoi / search.best_aaoi - 1.0;
            write_csv_line(csv, {std::to_string(users), std::to_string(v), format_number(rho),
                                 std::to_string(rule.best_frame_size), format_number(rule.best_param),
                                 format_number(rule.best_aaoi), std::to_string(search.best_frame_size),
                                 format_number(search.best_param), format_number(search.best_aaoi),
                                 format_number(gap)});
            checks.add(gap >= -1e-12 && gap <= 0.02,
                       fmt::format("fig4b V={} rho={}: rule {:.4f} vs search {:.4f} (gap {:.4f}, tol 0.02)", v, rho,
                                   rule.best_aaoi, search.best_aaoi, gap));
        }
    }
}

void reproduce_table1(ExperimentSpec &spec, const std::filesystem::path &dir, CheckList &checks, std::ostream &log) {
    auto csv = open_output(dir / "table1.csv");
    write_csv_preamble(csv, spec.to_json());
    write_csv_line(csv, {"table", "scheme", "N", "V", "rho", "printed_param", "printed_M", "printed_aaoi",
                         "analytic_aaoi", "search_param", "search_M", "search_aaoi", "search_halfwidth"});

    for (const auto &cell : reference_cells()) {
        const std::string label = fmt::format("table1{} {} N={} V={} rho={}", cell.table, fsard::to_string(cell.scheme),
                                              cell.users, cell.mini_slots, cell.rho);
        std::vector<std::string> row{std::string(1, cell.table), std::string(fsard::to_string(cell.scheme)),
                                     std::to_string(cell.users), cell.mini_slots ? std::to_string(cell.mini_slots) : "",
                                     format_number(cell.rho)};
        if (cell.scheme == Scheme::slotted_aloha) {
            row.insert(row.end(), {"", "", format_number(cell.aaoi), ""});
            if (spec.analytic_only) {
                row.insert(row.end(), {"", "", "", ""});
            } else {
                AlohaSearchOptions coarse;
                coarse.horizon_slots = 1'000'000;
                coarse.replications = 1;
                coarse.seed = *spec.seed;
                AlohaSearchOptions fine = coarse;
                fine.horizon_slots = spec.horizon;
                fine.replications = *spec.replications;
                fine.force = true;
                const auto best = optimize_slotted_aloha_refined(cell.users, cell.rho, coarse, fine);
                const double err = relative_error(best.best_aaoi, cell.aaoi);
                row.insert(row.end(), {format_number(best.best_param), "", format_number(best.best_aaoi),
                                       format_number(best.best_halfwidth)});
                checks.add(err <= 0.03, fmt::format("{}: simulated optimum {:.2f} at tau={} vs printed {:.2f} "
                                                    "(rel {:.4f}, tol 0.03)",
                                                    label, best.best_aaoi, best.best_param, cell.aaoi, err));
                log << '.' << std::flush;
            }
            write_csv_line(csv, row);
            continue;
        }

        const bool one = cell.scheme == Scheme::fsa_rd_one;
        const double gamma =
            one ? near_optimal_gamma(cell.users, cell.mini_slots, cell.frame_size, cell.rho) : cell.gamma;
        const ProtocolConfig config{cell.users, cell.frame_size, cell.mini_slots, cell.rho, gamma};
        const double analytic = one ? aaoi_fsa_rd_one(config).aaoi : aaoi_fsa_rd(config).aaoi;
        const double analytic_err = relative_error(analytic, cell.aaoi);
        checks.add(analytic_err <= 0.01,
                   fmt::format("{}: AAoI at printed (gamma={}, M={}) {:.4f} vs printed {:.2f} (rel {:.4f}, tol 0.01)",
                               label, format_number(gamma), cell.frame_size, analytic, cell.aaoi, analytic_err));

        const auto best = one ? optimize_fsa_rd_one(cell.users, cell.mini_slots, cell.rho)
                              : optimize_fsa_rd(cell.users, cell.mini_slots, cell.rho, default_gamma_grid(),
                                                {true, default_workers()});
        const double search_err = relative_error(best.best_aaoi, cell.aaoi);
        const double gamma_tol = one ? 5e-5 : 0.02 + kRangeSlack;
        const bool pass = best.best_frame_size == cell.frame_size && search_err <= 0.01 &&
                          std::abs(best.best_param - cell.gamma) <= gamma_tol;
        checks.add(pass, fmt::format("{}: optimum (gamma={:.4f}, M={}, {:.4f}) vs printed (gamma={}, M={}, {:.2f}) "
                                     "(rel {:.4f}, tol 0.01; gamma tol {})",
                                     label, best.best_param, best.best_frame_size, best.best_aaoi,
                                     format_number(cell.gamma), cell.frame_size, cell.aaoi, search_err,
                                     one ? "5e-05" : "0.02"));
        row.insert(row.end(), {format_number(cell.gamma), std::to_string(cell.frame_size), format_number(cell.aaoi),
                               format_number(analytic), format_number(best.best_param),
                               std::to_string(best.best_frame_size), format_number(best.best_aaoi), ""});
        write_csv_line(csv, row);
    }
    if (!spec.analytic_only) log << '\n';
}

// ---- command line ----

struct RawOptions {
    std::string config, scheme, users, frame_sizes, mini_slots, rho, gamma, tau, horizon, warmup, reps, seed, out,
        format;
    bool trace = false, force = false, analytic_only = false;
    std::string target;
};

void add_common_options(CLI::App &cmd, RawOptions &raw) {
    cmd.add_option("--config", raw.config, "JSON config file (or a CSV written by this tool)");
    cmd.add_option("--scheme", raw.scheme, "fsa-rd, fsa-rd-one or slotted-aloha");
    cmd.add_option("--N", raw.users, "number of users");
    cmd.add_option("--M", raw.frame_sizes, "slots per frame (2..V+1)");
    cmd.add_option("--V", raw.mini_slots, "mini-slots in the reservation slot");
    cmd.add_option("--rho", raw.rho, "per-slot update generation probability");
    cmd.add_option("--gamma", raw.gamma, "reservation probability (default: near-optimal value)");
    cmd.add_option("--tau", raw.tau, "slotted ALOHA transmission probability");
    cmd.add_option("--horizon", raw.horizon, "simulated slots (default 10000000)");
    cmd.add_option("--warmup", raw.warmup, "discarded slots (default 10^4 frames)");
    cmd.add_option("--reps", raw.reps, "replications");
    cmd.add_option("--seed", raw.seed, "master seed (default: generated and recorded)");
    cmd.add_option("--out", raw.out, "output file (reproduce: output directory)");
    cmd.add_option("--format", raw.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd.add_flag("--trace", raw.trace, "write per-reception traces next to the output");
    cmd.add_flag("--force", raw.force, "report a stochastic optimum even when it is not separated");
}

ExperimentSpec resolve(Command command, const RawOptions &raw) {
    ExperimentSpec spec;
    spec.command = command;
    if (!raw.config.empty()) apply_json(spec, load_config_file(raw.config));
    Json flags = Json::object();
    const std::pair<const char *, const std::string *> text_options[] = {
        {"scheme", &raw.scheme}, {"N", &raw.users},         {"M", &raw.frame_sizes}, {"V", &raw.mini_slots},
        {"rho", &raw.rho},       {"gamma", &raw.gamma},     {"tau", &raw.tau},       {"horizon", &raw.horizon},
        {"warmup", &raw.warmup}, {"reps", &raw.reps},       {"seed", &raw.seed},     {"out", &raw.out},
        {"format", &raw.format}, {"target", &raw.target}};
    for (const auto &[key, value] : text_options)
        if (!value->empty()) flags[key] = *value;
    if (raw.trace) flags["trace"] = true;
    if (raw.force) flags["force"] = true;
    if (raw.analytic_only) flags["analytic_only"] = true;
    apply_json(spec, flags);
    spec.command = command;
    return spec;
}

} // namespace

std::vector<double> parse_real_range(const std::string &text, const std::string &parameter) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError(parameter, "empty value");
    std::vector<double> values;
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw ConfigError(parameter, fmt::format("range '{}' must be start:stop:step", t));
        const double a = parse_real(parts[0], parameter), b = parse_real(parts[1], parameter),
                     step = parse_real(parts[2], parameter);
        if (!(step > 0.0) || b < a) throw ConfigError(parameter, fmt::format("range '{}' is empty", t));
        const auto count = static_cast<long long>(std::floor((b - a) / step + kRangeSlack));
        if (count > 1'000'000) throw ConfigError(parameter, fmt::format("range '{}' is too long", t));
        for (long long k = 0; k <= count; ++k)
            values.push_back(std::round((a + static_cast<double>(k) * step) * 1e12) / 1e12);
    } else {
        for (const auto &part : split(t, ',')) values.push_back(parse_real(part, parameter));
    }
    return values;
}

std::vector<int> parse_int_range(const std::string &text, const std::string &parameter) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError(parameter, "empty value");
    std::vector<int> values;
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw ConfigError(parameter, fmt::format("range '{}' must be start:stop:step", t));
        const long long a = parse_integer(parts[0], parameter), b = parse_integer(parts[1], parameter),
                        step = parse_integer(parts[2], parameter);
        if (step <= 0 || b < a) throw ConfigError(parameter, fmt::format("range '{}' is empty", t));
        if ((b - a) / step > 1'000'000) throw ConfigError(parameter, fmt::format("range '{}' is too long", t));
        for (long long v = a; v <= b; v += step) values.push_back(static_cast<int>(v));
    } else {
        for (const auto &part : split(t, ',')) values.push_back(static_cast<int>(parse_integer(part, parameter)));
    }
    return values;
}

Json ExperimentSpec::to_json() const {
    Json j{{"command", std::string(cli::to_string(command))}};
    if (command == Command::reproduce) j["target"] = target;
    j["scheme"] = std::string(fsard::to_string(scheme));
    j["N"] = users;
    j["M"] = frame_sizes;
    j["V"] = mini_slots;
    Json rhos = Json::array(), gammas = Json::array(), taus = Json::array();
    for (double v : rho) rhos.push_back(json_number(v));
    for (double v : gamma) gammas.push_back(json_number(v));
    for (double v : tau) taus.push_back(json_number(v));
    j["rho"] = rhos;
    j["gamma"] = gammas;
    j["tau"] = taus;
    j["horizon"] = horizon;
    j["warmup"] = warmup ? Json(*warmup) : Json(nullptr);
    j["reps"] = replications ? Json(*replications) : Json(nullptr);
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["out"] = out;
    j["format"] = format == Format::csv ? "csv" : "json";
    j["trace"] = trace;
    j["force"] = force;
    j["analytic_only"] = analytic_only;
    return j;
}

void apply_json(ExperimentSpec &spec, const Json &config) {
    if (!config.is_object()) throw ConfigError("config", "expected a JSON object");
    for (const auto &[key, value] : config.items()) {
        if (key == "command" || key == "version") continue;
        if (key == "scheme") {
            spec.scheme = parse_scheme(value.get<std::string>());
        } else if (key == "target") {
            spec.target = value.get<std::string>();
        } else if (key == "N") {
            spec.users = json_ints(value, key);
        } else if (key == "M") {
            spec.frame_sizes = json_ints(value, key);
        } else if (key == "V") {
            spec.mini_slots = json_ints(value, key);
        } else if (key == "rho") {
            spec.rho = json_reals(value, key);
        } else if (key == "gamma") {
            spec.gamma = json_reals(value, key);
        } else if (key == "tau") {
            spec.tau = json_reals(value, key);
        } else if (key == "horizon" || key == "warmup" || key == "reps" || key == "seed") {
            if (value.is_null()) {
                if (key == "warmup") spec.warmup.reset();
                if (key == "reps") spec.replications.reset();
                if (key == "seed") spec.seed.reset();
                continue;
            }
            const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
            if (key == "seed") {
                try {
                    std::size_t used = 0;
                    spec.seed = std::stoull(text, &used);
                    if (used != text.size()) throw std::invalid_argument(text);
                } catch (const std::exception &) {
                    throw ConfigError("seed", fmt::format("cannot parse '{}' as an unsigned 64-bit integer", text));
                }
                continue;
            }
            const long long n = parse_integer(text, key);
            if (key == "horizon") spec.horizon = n;
            if (key == "warmup") spec.warmup = n;
            if (key == "reps") {
                if (n < 1) throw ConfigError("reps", "at least one replication is required");
                spec.replications = static_cast<int>(n);
            }
        } else if (key == "out") {
            spec.out = value.get<std::string>();
        } else if (key == "format") {
            const auto f = value.get<std::string>();
            if (f != "csv" && f != "json") throw ConfigError("format", fmt::format("unknown format '{}'", f));
            spec.format = f == "csv" ? Format::csv : Format::json;
        } else if (key == "trace") {
            spec.trace = value.get<bool>();
        } else if (key == "force") {
            spec.force = value.get<bool>();
        } else if (key == "analytic_only") {
            spec.analytic_only = value.get<bool>();
        } else {
            throw ConfigError(key, "unknown configuration key");
        }
    }
    normalize(spec.users);
    normalize(spec.frame_sizes);
    normalize(spec.mini_slots);
    normalize(spec.rho);
    normalize(spec.gamma);
    normalize(spec.tau);
    if (spec.users.empty() || spec.frame_sizes.empty() || spec.mini_slots.empty() || spec.rho.empty())
        throw ConfigError(spec.users.empty() ? "N" : spec.frame_sizes.empty() ? "M" : spec.mini_slots.empty() ? "V" : "rho",
                          "parameter list is empty");
}

Json load_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", fmt::format("cannot read '{}'", path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (text.rfind("# fsard-csv", 0) == 0) {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line) && line.rfind('#', 0) == 0)
            if (line.rfind("# spec: ", 0) == 0) return Json::parse(line.substr(8));
        throw ConfigError("config", fmt::format("'{}' has no embedded spec line", path));
    }
    try {
        Json doc = Json::parse(text);
        if (doc.contains("spec") && doc.contains("format")) return doc["spec"];
        return doc;
    } catch (const Json::parse_error &e) {
        throw ConfigError("config", fmt::format("'{}' is not valid JSON: {}", path, e.what()));
    }
}

int run_analyze(ExperimentSpec &spec, std::ostream &out, std::ostream &) {
    if (spec.scheme == Scheme::slotted_aloha)
        throw ConfigError("scheme", "slotted ALOHA has no analytical model; use simulate or optimize");

    std::vector<AnalysisReport> reports;
    for (int n : spec.users)
        for (int v : spec.mini_slots)
            for (int m : spec.frame_sizes)
                for (double rho : spec.rho) {
                    validate_frame_parameters(n, v, m, rho);
                    const auto gammas =
                        spec.gamma.empty() ? std::vector<double>{near_optimal_gamma(n, v, m, rho)} : spec.gamma;
                    const OccupancyTable table(v, n);
                    for (double gamma : gammas) {
                        const ProtocolConfig config{n, m, v, rho, gamma};
                        reports.push_back(spec.scheme == Scheme::fsa_rd ? aaoi_fsa_rd(config, table)
                                                                        : aaoi_fsa_rd_one(config, table));
                    }
                }

    Sink sink(spec.out, out);
    if (spec.format == Format::json) {
        Json doc = json_document(spec);
        doc["results"] = Json::array();
        for (const auto &r : reports) doc["results"].push_back(to_json(r));
        *sink << doc.dump(2) << '\n';
    } else {
        write_csv_preamble(*sink, spec.to_json());
        write_csv_line(*sink, analysis_csv_header());
        for (const auto &r : reports) write_csv_line(*sink, analysis_csv_row(r));
    }
    return ExitCode::ok;
}

int run_simulate(ExperimentSpec &spec, std::ostream &out, std::ostream &log) {
    if (!spec.replications) spec.replications = 5;
    ensure_seed(spec, log);
    const int reps = *spec.replications;

    std::vector<SchemeSpec> schemes;
    if (spec.scheme == Scheme::slotted_aloha) {
        if (spec.tau.empty()) throw ConfigError("tau", "slotted ALOHA simulation needs --tau");
        if (spec.trace) throw ConfigError("trace", "reception traces are only recorded for framed schemes");
        for (int n : spec.users)
            for (double rho : spec.rho)
                for (double tau : spec.tau) schemes.push_back(SchemeSpec::slotted_aloha({n, rho, tau}));
    } else {
        for (int n : spec.users)
            for (int v : spec.mini_slots)
                for (int m : spec.frame_sizes)
                    for (double rho : spec.rho) {
                        validate_frame_parameters(n, v, m, rho);
                        const auto gammas =
                            spec.gamma.empty() ? std::vector<double>{near_optimal_gamma(n, v, m, rho)} : spec.gamma;
                        for (double gamma : gammas)
                            schemes.push_back(SchemeSpec::framed(spec.scheme, {n, m, v, rho, gamma}));
                    }
    }
    for (const auto &s : schemes) s.validate();

    std::vector<ReplicatedResult> results;
    for (std::size_t k = 0; k < schemes.size(); ++k) {
        const auto &scheme = schemes[k];
        const std::int64_t warmup = spec.warmup.value_or(default_warmup(scheme));
        if (!spec.trace) {
            results.push_back(simulate_replications(scheme, spec.horizon, warmup, *spec.seed, reps, {}, default_workers()));
            continue;
        }
        // The first replication writes the trace; the rest run as usual.
        const std::string path = fmt::format("{}-trace-{}.csv", path_stem(spec.out, "fsard"), k);
        std::ofstream trace_file(path, std::ios::binary);
        if (!trace_file) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
        SimOptions traced;
        traced.trace_csv = &trace_file;
        ReplicatedResult rr;
        std::vector<double> values;
        for (int r = 0; r < reps; ++r) {
            rr.runs.push_back(simulate(scheme, spec.horizon, warmup, derive_stream_seed(*spec.seed, static_cast<std::uint64_t>(r)),
                                       r == 0 ? traced : SimOptions{}));
            values.push_back(rr.runs.back().network_aaoi);
        }
        double sum = 0.0;
        for (double v : values) sum += v;
        rr.mean_aaoi = sum / static_cast<double>(values.size());
        rr.ci_halfwidth = confidence_halfwidth(values);
        for (auto &run : rr.runs) run.ci_halfwidth = rr.ci_halfwidth;
        log << "trace: " << path << '\n';
        results.push_back(std::move(rr));
    }

    Sink sink(spec.out, out);
    if (spec.format == Format::json) {
        Json doc = json_document(spec);
        doc["results"] = Json::array();
        for (const auto &rr : results) {
            Json entry{{"mean_aaoi", json_number(rr.mean_aaoi)}, {"ci_halfwidth", json_number(rr.ci_halfwidth)}};
            entry["runs"] = Json::array();
            for (const auto &run : rr.runs) entry["runs"].push_back(to_json(run));
            doc["results"].push_back(entry);
        }
        *sink << doc.dump(2) << '\n';
    } else {
        write_csv_preamble(*sink, spec.to_json());
        write_csv_line(*sink, simulation_csv_header());
        for (const auto &rr : results) {
            for (std::size_t r = 0; r < rr.runs.size(); ++r)
                write_csv_line(*sink, simulation_csv_row(rr.runs[r], static_cast<int>(r)));
            SimResult aggregate = rr.runs.front();
            aggregate.seed = *spec.seed;
            aggregate.network_aaoi = rr.mean_aaoi;
            aggregate.ci_halfwidth = rr.ci_halfwidth;
            aggregate.reception_count = 0;
            for (const auto &run : rr.runs) aggregate.reception_count += run.reception_count;
            write_csv_line(*sink, simulation_csv_row(aggregate, -1));
        }
    }
    return ExitCode::ok;
}

int run_optimize(ExperimentSpec &spec, std::ostream &out, std::ostream &log) {
    struct Entry {
        int users, mini_slots;
        double rho;
        OptimizationResult result;
    };
    std::vector<Entry> entries;

    if (spec.scheme == Scheme::slotted_aloha) {
        if (!spec.replications) spec.replications = 3;
        ensure_seed(spec, log);
        AlohaSearchOptions options;
        options.horizon_slots = spec.horizon;
        options.replications = *spec.replications;
        options.seed = *spec.seed;
        options.force = spec.force;
        if (spec.warmup) options.warmup_slots = *spec.warmup;
        for (int n : spec.users)
            for (double rho : spec.rho) {
                if (spec.tau.empty()) {
                    AlohaSearchOptions coarse = options;
                    coarse.horizon_slots = std::max<std::int64_t>(1'000'000, spec.horizon / 10);
                    coarse.replications = 1;
                    entries.push_back({n, 0, rho, optimize_slotted_aloha_refined(n, rho, coarse, options)});
                } else {
                    entries.push_back({n, 0, rho, optimize_slotted_aloha(n, rho, spec.tau, options)});
                }
            }
    } else {
        const bool one = spec.scheme == Scheme::fsa_rd_one;
        for (int n : spec.users)
            for (int v : spec.mini_slots)
                for (double rho : spec.rho) {
                    OptimizationResult r;
                    if (spec.gamma.empty())
                        r = one ? optimize_fsa_rd_one(n, v, rho)
                                : optimize_fsa_rd(n, v, rho, default_gamma_grid(), {true, default_workers()});
                    else
                        r = one ? optimize_fsa_rd_one_grid(n, v, rho, spec.gamma, {false, default_workers()})
                                : optimize_fsa_rd(n, v, rho, spec.gamma, {false, default_workers()});
                    entries.push_back({n, v, rho, std::move(r)});
                }
    }

    auto summary_of = [&](const Entry &e) {
        Json s{{"N", e.users}};
        if (spec.scheme != Scheme::slotted_aloha) s["V"] = e.mini_slots;
        s["rho"] = json_number(e.rho);
        const Json fields = to_json(e.result);
        for (const auto &[key, value] : fields.items()) s[key] = value;
        return s;
    };

    Sink sink(spec.out, out);
    if (spec.format == Format::json) {
        Json doc = json_document(spec);
        doc["results"] = Json::array();
        for (const auto &e : entries) {
            Json s = summary_of(e);
            s["trace"] = Json::array();
            for (const auto &p : e.result.trace)
                s["trace"].push_back(Json{{"M", p.frame_size},
                                          {"param", json_number(p.param)},
                                          {"aaoi", json_number(p.aaoi)},
                                          {"halfwidth", json_number(p.halfwidth)}});
            doc["results"].push_back(s);
        }
        *sink << doc.dump(2) << '\n';
        return ExitCode::ok;
    }

    write_csv_preamble(*sink, spec.to_json());
    write_csv_line(*sink, search_csv_header());
    for (const auto &e : entries) write_search_rows(*sink, spec.scheme, e.users, e.mini_slots, e.rho, e.result);

    Json summary = json_document(spec);
    summary["results"] = Json::array();
    for (const auto &e : entries) summary["results"].push_back(summary_of(e));
    if (spec.out.empty() || spec.out == "-") {
        log << summary.dump(2) << '\n';
    } else {
        const std::string path = path_stem(spec.out, "fsard") + ".summary.json";
        std::ofstream file(path, std::ios::binary);
        if (!file) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
        file << summary.dump(2) << '\n';
    }
    return ExitCode::ok;
}

int run_reproduce(ExperimentSpec &spec, std::ostream &out, std::ostream &log) {
    if (spec.target != "fig3" && spec.target != "fig4" && spec.target != "table1")
        throw ConfigError("target", fmt::format("unknown target '{}' (fig3, fig4, table1)", spec.target));
    if (!spec.replications) spec.replications = 1;
    if (spec.out.empty() || spec.out == "-") spec.out = "fsard-reproduce";
    if (!spec.analytic_only && spec.target != "fig4") ensure_seed(spec, log);
    const std::filesystem::path dir(spec.out);
    std::filesystem::create_directories(dir);

    CheckList checks;
    if (spec.target == "fig3") reproduce_fig3(spec, dir, checks, log);
    if (spec.target == "fig4") reproduce_fig4(spec, dir, checks);
    if (spec.target == "table1") reproduce_table1(spec, dir, checks, log);
    return finish_reproduce(spec, checks, dir, out);
}

int main(int argc, const char *const *argv, std::ostream &out, std::ostream &log) {
    CLI::App app{"Age of information for framed reservation ALOHA and slotted ALOHA", "fsard"};
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);

    RawOptions analyze_raw, simulate_raw, optimize_raw, reproduce_raw;
    auto *analyze = app.add_subcommand("analyze", "analytical AAoI report for every parameter combination");
    auto *simulate = app.add_subcommand("simulate", "Monte Carlo AAoI with replications");
    auto *optimize = app.add_subcommand("optimize", "search for the AAoI-minimizing parameters");
    auto *reproduce = app.add_subcommand("reproduce", "regenerate a published figure or table with checks");
    add_common_options(*analyze, analyze_raw);
    add_common_options(*simulate, simulate_raw);
    add_common_options(*optimize, optimize_raw);
    add_common_options(*reproduce, reproduce_raw);
    reproduce->add_option("target", reproduce_raw.target, "fig3, fig4 or table1")->required();
    reproduce->add_flag("--analytic-only", reproduce_raw.analytic_only, "skip simulated series");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, log);
        return code == 0 ? ExitCode::ok : ExitCode::usage_error;
    }

    try {
        if (analyze->parsed()) {
            auto spec = resolve(Command::analyze, analyze_raw);
            return run_analyze(spec, out, log);
        }
        if (simulate->parsed()) {
            auto spec = resolve(Command::simulate, simulate_raw);
            return run_simulate(spec, out, log);
        }
        if (optimize->parsed()) {
            auto spec = resolve(Command::optimize, optimize_raw);
            return run_optimize(spec, out, log);
        }
        auto spec = resolve(Command::reproduce, reproduce_raw);
        return run_reproduce(spec, out, log);
    } catch (const ConfigError &e) {
        log << "error: invalid parameter " << e.what() << '\n';
        return ExitCode::usage_error;
    } catch (const DomainError &e) {
        log << "error: " << e.what() << '\n';
        return ExitCode::usage_error;
    } catch (const Json::exception &e) {
        log << "error: malformed configuration: " << e.what() << '\n';
        return ExitCode::usage_error;
    } catch (const std::exception &e) {
        log << "error: " << e.what() << '\n';
        return ExitCode::runtime_error;
    }
}

} // namespace fsard::cli
