#include "spur/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spur/embedding.hpp"

namespace spur {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int parse_int(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        int result = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return result;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer '" + value + "' for " + where);
    }
}

double parse_double(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        double result = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return result;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number '" + value + "' for " + where);
    }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream stream(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "run" && section != "trigger" && section != "samb" &&
                section != "kg" && section != "fusion" && section != "caps" &&
                section != "memory") {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unknown section [" + section + "]");
            }
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::string where = section + "." + key;

        if (section == "run") {
            if (key == "scenarios") cfg.scenarios = split_list(value);
            else if (key == "mode") cfg.mode = parse_run_mode(value);
            else if (key == "seed") cfg.seed = static_cast<unsigned>(parse_int(value, where));
            else if (key == "repeat") cfg.repeat = parse_int(value, where);
            else if (key == "workers") cfg.workers = parse_int(value, where);
            else if (key == "hint_k") cfg.hint_k = parse_int(value, where);
            else if (key == "output_dir") cfg.output_dir = value;
            else if (key == "task") cfg.task_text = value;
            else throw std::invalid_argument("config: unknown key " + where);
        } else if (section == "trigger") {
            if (key == "T") cfg.thresholds.T = parse_int(value, where);
            else if (key == "W") cfg.thresholds.W = parse_int(value, where);
            else if (key == "tau_v") cfg.thresholds.tau_v = parse_double(value, where);
            else if (key == "tau_z") cfg.thresholds.tau_z = parse_int(value, where);
            else if (key == "tau_r") cfg.thresholds.tau_r = parse_int(value, where);
            else if (key == "tau_rz") cfg.thresholds.tau_rz = parse_int(value, where);
            else if (key == "tau_ell") cfg.thresholds.tau_ell = parse_int(value, where);
            else throw std::invalid_argument("config: unknown key " + where);
        } else if (section == "samb") {
            if (key == "alpha_c") cfg.samb.alpha_c = parse_double(value, where);
            else if (key == "alpha_l") cfg.samb.alpha_l = parse_double(value, where);
            else if (key == "alpha_r") cfg.samb.alpha_r = parse_double(value, where);
            else if (key == "alpha_p") cfg.samb.alpha_p = parse_double(value, where);
            else if (key == "eta") cfg.samb.eta = parse_double(value, where);
            else if (key == "recency_decay_hours")
                cfg.samb.recency_decay_hours = parse_double(value, where);
            else if (key == "quick_path")
                cfg.samb.quick_path_threshold = parse_double(value, where);
            else if (key == "direct_adoption")
                cfg.samb.direct_adoption_threshold = parse_double(value, where);
            else throw std::invalid_argument("config: unknown key " + where);
        } else if (section == "kg") {
            if (key == "tau_kg") cfg.kg.tau_kg = parse_double(value, where);
            else if (key == "top_k") cfg.kg.top_k = parse_int(value, where);
            else if (key == "beta_c") cfg.kg.beta_c = parse_double(value, where);
            else if (key == "beta_p") cfg.kg.beta_p = parse_double(value, where);
            else if (key == "max_entries")
                cfg.kg.max_entries = static_cast<std::size_t>(parse_int(value, where));
            else if (key == "eta") cfg.kg.eta = parse_double(value, where);
            else throw std::invalid_argument("config: unknown key " + where);
        } else if (section == "fusion") {
            if (key == "lambda_mb") cfg.fusion.lambda_mb = parse_double(value, where);
            else if (key == "lambda_kg") cfg.fusion.lambda_kg = parse_double(value, where);
            else if (key == "epsilon") cfg.fusion.epsilon = parse_double(value, where);
            else throw std::invalid_argument("config: unknown key " + where);
        } else if (section == "caps") {
            if (key == "easy") cfg.caps.easy = parse_int(value, where);
            else if (key == "medium") cfg.caps.medium = parse_int(value, where);
            else if (key == "hard") cfg.caps.hard = parse_int(value, where);
            else throw std::invalid_argument("config: unknown key " + where);
        } else if (section == "memory") {
            if (key == "samb_in") cfg.samb_in = value;
            else if (key == "samb_out") cfg.samb_out = value;
            else if (key == "kg_nodes_in") cfg.kg_nodes_in = value;
            else if (key == "kg_edges_in") cfg.kg_edges_in = value;
            else if (key == "kg_nodes_out") cfg.kg_nodes_out = value;
            else if (key == "kg_edges_out") cfg.kg_edges_out = value;
            else throw std::invalid_argument("config: unknown key " + where);
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": key outside any section");
        }
    }
    if (cfg.repeat < 1) throw std::invalid_argument("config: repeat must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (cfg.hint_k < 1) throw std::invalid_argument("config: hint_k must be >= 1");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::invalid_argument("load_config: cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    RunConfig cfg;
    try {
        cfg = parse_config_text(buffer.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    // Input paths written in a config file resolve against the file, so packs
    // work from any working directory. Output locations stay cwd-relative;
    // they are operational, overridable, and excluded from the config hash.
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto rebase = [&base](std::string& p) {
        if (p.empty()) return;
        std::filesystem::path fp(p);
        if (fp.is_relative()) p = (base / fp).string();
    };
    for (std::string& scenario : cfg.scenarios) rebase(scenario);
    rebase(cfg.samb_in);
    rebase(cfg.kg_nodes_in);
    rebase(cfg.kg_edges_in);
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "[run]\n";
    out << "scenarios = ";
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
        if (i) out << ", ";
        out << cfg.scenarios[i];
    }
    out << '\n';
    out << "mode = " << run_mode_name(cfg.mode) << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "repeat = " << cfg.repeat << '\n';
    out << "workers = " << cfg.workers << '\n';
    out << "hint_k = " << cfg.hint_k << '\n';
    out << "output_dir = " << cfg.output_dir << '\n';
    out << "task = " << cfg.task_text << '\n';
    out << "[trigger]\n";
    out << "T = " << cfg.thresholds.T << '\n';
    out << "W = " << cfg.thresholds.W << '\n';
    out << "tau_v = " << cfg.thresholds.tau_v << '\n';
    out << "tau_z = " << cfg.thresholds.tau_z << '\n';
    out << "tau_r = " << cfg.thresholds.tau_r << '\n';
    out << "tau_rz = " << cfg.thresholds.tau_rz << '\n';
    out << "tau_ell = " << cfg.thresholds.tau_ell << '\n';
    out << "[samb]\n";
    out << "alpha_c = " << cfg.samb.alpha_c << '\n';
    out << "alpha_l = " << cfg.samb.alpha_l << '\n';
    out << "alpha_r = " << cfg.samb.alpha_r << '\n';
    out << "alpha_p = " << cfg.samb.alpha_p << '\n';
    out << "eta = " << cfg.samb.eta << '\n';
    out << "recency_decay_hours = " << cfg.samb.recency_decay_hours << '\n';
    out << "quick_path = " << cfg.samb.quick_path_threshold << '\n';
    out << "direct_adoption = " << cfg.samb.direct_adoption_threshold << '\n';
    out << "[kg]\n";
    out << "tau_kg = " << cfg.kg.tau_kg << '\n';
    out << "top_k = " << cfg.kg.top_k << '\n';
    out << "beta_c = " << cfg.kg.beta_c << '\n';
    out << "beta_p = " << cfg.kg.beta_p << '\n';
    out << "max_entries = " << cfg.kg.max_entries << '\n';
    out << "eta = " << cfg.kg.eta << '\n';
    out << "[fusion]\n";
    out << "lambda_mb = " << cfg.fusion.lambda_mb << '\n';
    out << "lambda_kg = " << cfg.fusion.lambda_kg << '\n';
    out << "epsilon = " << cfg.fusion.epsilon << '\n';
    out << "[caps]\n";
    out << "easy = " << cfg.caps.easy << '\n';
    out << "medium = " << cfg.caps.medium << '\n';
    out << "hard = " << cfg.caps.hard << '\n';
    out << "[memory]\n";
    out << "samb_in = " << cfg.samb_in << '\n';
    out << "samb_out = " << cfg.samb_out << '\n';
    out << "kg_nodes_in = " << cfg.kg_nodes_in << '\n';
    out << "kg_edges_in = " << cfg.kg_edges_in << '\n';
    out << "kg_nodes_out = " << cfg.kg_nodes_out << '\n';
    out << "kg_edges_out = " << cfg.kg_edges_out << '\n';
    return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // Worker count and output destinations cannot change a single logged
    // byte, so they do not participate in the identity hash. Input
    // endpoints do: a warm-started store changes episode behavior.
    RunConfig canon = cfg;
    canon.workers = RunConfig{}.workers;
    canon.output_dir = RunConfig{}.output_dir;
    canon.samb_out.clear();
    canon.kg_nodes_out.clear();
    canon.kg_edges_out.clear();
    return fnv1a64(serialize_config(canon));
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* seed = std::getenv("SPUR_SEED")) {
        cfg.seed = static_cast<unsigned>(parse_int(seed, "SPUR_SEED"));
    }
    if (const char* dir = std::getenv("SPUR_OUTPUT_DIR")) {
        cfg.output_dir = dir;
    }
}

}  // namespace spur
