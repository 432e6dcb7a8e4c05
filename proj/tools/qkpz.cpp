// Command-line front end for the qkpz engine: tree enumeration, elementary
// differentials, coherence and locality reports, counterterm assembly and the
// covariance constant.  Output is either human-readable text or a single JSON
// object {command, config, results}; exit code 0 means every requested
// identity verified, 1 means a verification failure (details in the report),
// 2 means a usage error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkpz/calculus.hpp"
#include "qkpz/coherence.hpp"
#include "qkpz/quadrature.hpp"
#include "qkpz/renorm.hpp"
#include "qkpz/rules.hpp"
#include "qkpz/symexpr.hpp"
#include "qkpz/tree_io.hpp"
#include "qkpz/upsilon.hpp"

namespace {

using nlohmann::json;
using namespace qkpz;

constexpr const char* kConfigEnvVar = "QKPZ_CONFIG";

struct CliConfig {
    Rat alpha_n = Rat(-3) / 2;
    Rat kappa = Rat(1) / 100;
    int param_trunc = 0;  // N: parameter-derivative truncation
    int noises = 2;
    bool json_output = false;
    std::string mollifier;  // table path; empty = polynomial bump
};

Rat parse_rat(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(s));
        return Rat(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw CLI::ValidationError("expected a rational p or p/q, got '" + s + "'");
    }
}

void apply_config_line(CliConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "alpha_n") cfg.alpha_n = parse_rat(value);
    else if (key == "kappa") cfg.kappa = parse_rat(value);
    else if (key == "param_trunc") cfg.param_trunc = std::stoi(value);
    else if (key == "noises") cfg.noises = std::stoi(value);
    else if (key == "format") cfg.json_output = (value == "json");
    else if (key == "mollifier") cfg.mollifier = value;
    else throw CLI::ValidationError("unknown config key '" + key + "'");
}

void load_config_file(CliConfig& cfg, const std::string& path, bool required) {
    std::ifstream in(path);
    if (!in) {
        if (required) throw CLI::ValidationError("cannot open config file: " + path);
        return;
    }
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

json config_json(const CliConfig& cfg) {
    return {{"alpha_n", cfg.alpha_n.str()},
            {"kappa", cfg.kappa.str()},
            {"param_trunc", cfg.param_trunc},
            {"noises", cfg.noises},
            {"mollifier", cfg.mollifier.empty() ? "poly_bump" : cfg.mollifier}};
}

json tree_record(const TreePtr& t, const CliConfig& cfg) {
    return {{"tree", render_tree(t)},
            {"ast", tree_to_json(t)},
            {"degree", degree(t, cfg.alpha_n, cfg.kappa).str()},
            {"symmetry", symmetry_factor(t).str()},
            {"noises", noise_count(t)}};
}

Mollifier make_mollifier(const CliConfig& cfg) {
    return cfg.mollifier.empty() ? Mollifier::poly_bump()
                                 : Mollifier::from_file(cfg.mollifier);
}

// ---------------------------------------------------------------------------

int cmd_parse(const CliConfig& cfg, const std::string& text, json& results) {
    const TreePtr t = parse_tree(text);
    results = tree_record(t, cfg);
    results["canonical"] = render_tree(t);
    results["roundtrip"] = tree_equal(t, tree_from_json(tree_to_json(t)));
    return results["roundtrip"].get<bool>() ? 0 : 1;
}

int cmd_enumerate(const CliConfig& cfg, json& results) {
    RuleSet rules{RuleKind::Saturated};
    EnumConfig ec;
    ec.alpha_n = cfg.alpha_n;
    ec.kappa = cfg.kappa;
    ec.noise_counts = {cfg.noises};
    ec.max_param_deriv = cfg.param_trunc;
    std::vector<TreePtr> trees = enumerate_negative(rules, ec);
    if (cfg.param_trunc > 0) trees = parametrise(trees, cfg.param_trunc);
    results["count"] = trees.size();
    results["trees"] = json::array();
    for (const auto& t : trees) results["trees"].push_back(tree_record(t, cfg));
    return 0;
}

int cmd_upsilon(const CliConfig& cfg, const std::string& text, const std::string& which,
                int alpha_h, int alpha_t, int alpha_x, json& results) {
    const TreePtr t = parse_tree(text);
    SymExpr value;
    if (which == "F") value = upsilon_F(t);
    else if (which == "Fhat") value = upsilon_Fhat(t);
    else value = upsilon_V(ParamIndex{alpha_h, {alpha_t, alpha_x}}, t);
    results = {{"tree", render_tree(t)},
               {"nonlinearity", which},
               {"value", value.str()},
               {"value_terms", value.to_json()},
               {"symmetry", symmetry_factor(t).str()}};
    (void)cfg;
    return 0;
}

int cmd_coherence(const CliConfig& cfg, json& results) {
    const SystemExpansion sys =
        expand_system(cfg.noises, std::max(cfg.param_trunc, cfg.noises));
    const CoherenceReport rep = check_coherence(sys);
    results["max_noises"] = rep.max_noises;
    results["entries"] = rep.entries.size();
    results["all_pass"] = rep.all_pass;
    results["failures"] = json::array();
    for (const auto& e : rep.entries)
        if (!e.pass)
            results["failures"].push_back({{"component", e.component},
                                           {"key", render_tree(e.key)},
                                           {"coefficient", e.coefficient.str()},
                                           {"upsilon_over_s", e.upsilon_over_s.str()}});
    return rep.all_pass ? 0 : 1;
}

int cmd_locality(const std::string& t1, const std::string& t2, json& results) {
    const LocalityReport rep = check_locality(parse_tree(t1), parse_tree(t2));
    results["pass"] = rep.pass;
    results["graded_zero"] = rep.graded_zero;
    results["value"] = rep.value.str();
    results["expected"] = rep.expected.str();
    results["ledger"] = json::array();
    for (const auto& [label, piece] : rep.ledger)
        results["ledger"].push_back({{"piece", label}, {"value", piece.str()}});
    return rep.pass ? 0 : 1;
}

int cmd_null(const std::string& t1, const std::string& t2, const std::string& kind,
             int k, int l, json& results) {
    const NullReport rep =
        check_null(parse_tree(t1), parse_tree(t2),
                   kind == "cherry" ? NullKind::Cherry : NullKind::SingleEdge, k, l);
    results = {{"kind", kind},        {"k", rep.k},
               {"l", rep.l},          {"in_claim", rep.in_claim},
               {"value", rep.value.str()}, {"local", rep.local.str()},
               {"pass", rep.pass}};
    return rep.pass ? 0 : 1;
}

json counterterm_json(const CountertermExpr& ct) {
    json terms = json::array();
    for (const auto& t : ct.terms)
        terms.push_back({{"constant", t.constant.name()},
                         {"tree", render_tree(t.tree)},
                         {"weight", t.weight.str()},
                         {"value", t.value.str()}});
    return terms;
}

int cmd_counterterm(const CliConfig& cfg, bool raw_only, json& results) {
    RuleSet rules{RuleKind::Saturated};
    EnumConfig ec;
    ec.alpha_n = cfg.alpha_n;
    ec.kappa = cfg.kappa;
    ec.noise_counts = {cfg.noises};
    const int trunc = cfg.param_trunc > 0 ? cfg.param_trunc : 1;
    ec.max_param_deriv = trunc;
    const std::vector<TreePtr> shat =
        parametrise(enumerate_negative(rules, ec), trunc);
    const CountertermExpr raw = assemble_counterterm(shat, CountertermMode::FhatOverQ);
    results["raw_trees"] = shat.size();
    results["raw"] = counterterm_json(raw);
    if (raw_only) return 0;
    const ConstraintTable table = chain_rule_constraints(cfg.noises);
    results["generators"] = table.generators;
    results["rank"] = table.rank;
    results["relations"] = table.relations.size();
    try {
        const CountertermExpr local = reduce_to_local(raw, table);
        results["local"] = counterterm_json(local);
        results["pass"] = true;
        return 0;
    } catch (const NonlocalResidue& e) {
        results["pass"] = false;
        results["residue"] = e.residue.str();
        return 1;
    }
}

int cmd_ito(const CliConfig& cfg, std::vector<double> eps, json& results) {
    if (eps.empty()) eps = {1.0, 0.1, 0.01};
    const Mollifier rho = make_mollifier(cfg);
    const double ref = eps.front() * ito_constant(rho, eps.front());
    bool pass = true;
    results["samples"] = json::array();
    for (double e : eps) {
        const double c = ito_constant(rho, e);
        const double scaled = e * c;
        pass = pass && std::fabs(scaled - ref) <= 1e-10;
        results["samples"].push_back(
            {{"eps", e}, {"c_eps", c}, {"eps_times_c_eps", scaled}});
    }
    results["limit_constant"] = ref;
    results["pass"] = pass;
    return pass ? 0 : 1;
}

void print_text(const json& results, std::ostream& os, int indent = 0) {
    // Flat, deterministic text rendering of the result object.
    const std::string pad(indent, ' ');
    if (results.is_object()) {
        for (const auto& [key, value] : results.items()) {
            if (value.is_structured()) {
                os << pad << key << ":\n";
                print_text(value, os, indent + 2);
            } else {
                os << pad << key << " = " << (value.is_string() ? value.get<std::string>()
                                                                : value.dump())
                   << "\n";
            }
        }
    } else if (results.is_array()) {
        for (const auto& value : results) {
            os << pad << "-\n";
            print_text(value, os, indent + 2);
        }
    } else {
        os << pad << results.dump() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decorated-tree renormalisation workbench"};
    app.require_subcommand(1);

    CliConfig cfg;
    if (const char* env = std::getenv(kConfigEnvVar)) load_config_file(cfg, env, false);

    std::string config_path;
    app.add_option("--config", config_path, "key=value config file");
    app.add_flag("--json", cfg.json_output, "emit a single JSON object");
    app.add_option("--alpha-n", [&cfg](const CLI::results_t& r) {
        cfg.alpha_n = parse_rat(r.front());
        return true;
    }, "noise degree (rational p/q)");
    app.add_option("--kappa", [&cfg](const CLI::results_t& r) {
        cfg.kappa = parse_rat(r.front());
        return true;
    }, "degree shift (rational p/q)");
    app.add_option("--param-trunc", cfg.param_trunc, "parameter-derivative truncation N");
    app.add_option("--noises", cfg.noises, "noise count / sector");
    app.add_option("--mollifier", cfg.mollifier, "mollifier table file (x value rows)");

    std::string tree_text, tau1, tau2, which = "Fhat", null_kind = "single";
    int alpha_h = 0, alpha_t = 0, alpha_x = 0, null_k = 2, null_l = 0;
    bool raw_only = false;
    std::vector<double> eps;

    CLI::App* parse_cmd = app.add_subcommand("parse", "parse and canonicalize a tree");
    parse_cmd->add_option("--tree", tree_text, "tree literal")->required();

    app.add_subcommand("enumerate", "negative-degree trees of the sector");

    CLI::App* ups = app.add_subcommand("upsilon", "elementary differential of a tree");
    ups->add_option("--tree", tree_text, "tree literal")->required();
    ups->add_option("--nonlinearity", which, "F | Fhat | V")
        ->check(CLI::IsMember({"F", "Fhat", "V"}));
    ups->add_option("--alpha-h", alpha_h, "V component: parameter order");
    ups->add_option("--alpha-t", alpha_t, "V component: time order");
    ups->add_option("--alpha-x", alpha_x, "V component: space order");

    app.add_subcommand("coherence", "expansion coefficients vs differentials");

    CLI::App* loc = app.add_subcommand("locality", "covariant locality of a pair");
    loc->add_option("--tau1", tau1, "first tree")->required();
    loc->add_option("--tau2", tau2, "second tree")->required();

    CLI::App* nul = app.add_subcommand("null", "higher-derivative annihilation");
    nul->add_option("--tau1", tau1, "first tree")->required();
    nul->add_option("--tau2", tau2, "second tree")->required();
    nul->add_option("--kind", null_kind, "single | cherry")
        ->check(CLI::IsMember({"single", "cherry"}));
    nul->add_option("--k", null_k, "derivative order k");
    nul->add_option("--l", null_l, "derivative order l (cherry)");

    CLI::App* ct = app.add_subcommand("counterterm", "assemble and localize the sector");
    ct->add_flag("--raw", raw_only, "stop after the raw assembly");

    CLI::App* ito = app.add_subcommand("ito-constant", "covariance constant per scale");
    ito->add_option("--eps", eps, "mollification scales");

    // Allow the shared options before or after the subcommand name.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    json out;
    int code = 2;
    try {
        if (!config_path.empty()) load_config_file(cfg, config_path, true);
        json results;
        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "parse") code = cmd_parse(cfg, tree_text, results);
        else if (command == "enumerate") code = cmd_enumerate(cfg, results);
        else if (command == "upsilon")
            code = cmd_upsilon(cfg, tree_text, which, alpha_h, alpha_t, alpha_x, results);
        else if (command == "coherence") code = cmd_coherence(cfg, results);
        else if (command == "locality") code = cmd_locality(tau1, tau2, results);
        else if (command == "null")
            code = cmd_null(tau1, tau2, null_kind, null_k, null_l, results);
        else if (command == "counterterm") code = cmd_counterterm(cfg, raw_only, results);
        else if (command == "ito-constant") code = cmd_ito(cfg, eps, results);
        out = {{"command", command}, {"config", config_json(cfg)}, {"results", results}};
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NotLocalInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SectorUnsupported& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (cfg.json_output) {
        std::cout << out.dump(2) << "\n";
    } else {
        print_text(out["results"], std::cout);
    }
    return code;
}
