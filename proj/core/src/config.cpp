#include "imura/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "imura/errors.hpp"

namespace imura {
namespace {

// floor(log2(binomial(n, k))) without overflow; exact for the sizes used here.
int floor_log2_binomial(int n, int k) {
    double log2c = 0.0;
    for (int i = 1; i <= k; ++i) {
        log2c += std::log2(static_cast<double>(n - k + i)) - std::log2(static_cast<double>(i));
    }
    // guard against 9.999999... artifacts at exact powers of two
    const double eps = 1e-9;
    return static_cast<int>(std::floor(log2c + eps));
}

}  // namespace

void validate(SystemConfig& config) {
    if (auto err = try_validate(config)) throw ConfigError(*err);
}

std::optional<std::string> try_validate(SystemConfig& config) {
    auto fail = [](const std::string& relation) {
        return std::optional<std::string>("inconsistent-lengths: " + relation);
    };

    if (config.N_slot < 2) return fail("N_slot >= 2");
    if (config.K < 1 || config.K >= config.N_slot) return fail("1 <= K < N_slot");
    if (config.L_bp < 1) return fail("L_bp >= 1");
    if (config.M < 1) return fail("M >= 1");
    if (config.N_a < 1) return fail("N_a >= 1");
    if (config.L_bs < 1) return fail("L_bs >= 1");
    if (!std::isfinite(config.snr_db)) return fail("snr_db finite");
    if (config.tau_E < 0.0) return fail("tau_E >= 0");
    if (config.cbml_passes < 1) return fail("cbml_passes >= 1");
    if (config.sdr_samples < 1) return fail("sdr_samples >= 1");
    if (config.ml_cap < 1) return fail("ml_cap >= 1");

    const int lbi = floor_log2_binomial(config.N_slot, config.K);
    if (config.L_bI == 0) {
        config.L_bI = lbi;
    } else if (config.L_bI != lbi) {
        return fail("L_bI = floor(log2(binomial(N_slot, K))) = " + std::to_string(lbi) +
                    ", got " + std::to_string(config.L_bI));
    }

    const int lbd = config.L_bs + 1 - config.L_bp - config.L_bI;
    if (lbd < 0) return fail("L_bd = L_bs + 1 - L_bp - L_bI >= 0");
    if (config.L_bd == 0) {
        config.L_bd = lbd;
    } else if (config.L_bd != lbd) {
        return fail("L_bd = L_bs + 1 - L_bp - L_bI = " + std::to_string(lbd) + ", got " +
                    std::to_string(config.L_bd));
    }

    const int lp = config.L_bs + 1 - config.L_bd;
    if (config.L_p == 0) {
        config.L_p = lp;
    } else if (config.L_p != lp) {
        return fail("L_p = L_bs + 1 - L_bd = " + std::to_string(lp) + ", got " +
                    std::to_string(config.L_p));
    }

    config.N_cu = config.N_slot * (config.L_bs + 1);
    if (config.t_max == 0) config.t_max = config.N_a;
    if (config.t_max < 1) return fail("t_max >= 1");
    return std::nullopt;
}

double sigma2_from_snr(const SystemConfig& config) {
    return sigma2_from_snr(config, config.snr_db);
}

double sigma2_from_snr(const SystemConfig& config, double snr_db) {
    if (!std::isfinite(snr_db)) throw ConfigError("sigma2_from_snr: snr_db must be finite");
    const double snr_linear = std::pow(10.0, snr_db / 10.0);
    return static_cast<double>(config.M) * config.K / (snr_linear * config.N_slot);
}

namespace {

void assign_key(SystemConfig& c, const std::string& key, const std::string& value, int line_no) {
    auto bad_value = [&] {
        throw ConfigError("config line " + std::to_string(line_no) + ": bad value for '" + key +
                          "': " + value);
    };
    auto as_int = [&]() -> int {
        try {
            size_t pos = 0;
            int v = std::stoi(value, &pos);
            if (pos != value.size()) bad_value();
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            bad_value();
        }
        return 0;
    };
    auto as_double = [&]() -> double {
        try {
            size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size()) bad_value();
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            bad_value();
        }
        return 0.0;
    };
    auto as_u64 = [&]() -> std::uint64_t {
        try {
            size_t pos = 0;
            std::uint64_t v = std::stoull(value, &pos);
            if (pos != value.size()) bad_value();
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            bad_value();
        }
        return 0;
    };
    auto as_bool = [&]() -> bool {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        bad_value();
        return false;
    };

    if (key == "L_bs") c.L_bs = as_int();
    else if (key == "L_bp") c.L_bp = as_int();
    else if (key == "L_bI") c.L_bI = as_int();
    else if (key == "L_bd") c.L_bd = as_int();
    else if (key == "L_p") c.L_p = as_int();
    else if (key == "N_slot") c.N_slot = as_int();
    else if (key == "K") c.K = as_int();
    else if (key == "M") c.M = as_int();
    else if (key == "N_a") c.N_a = as_int();
    else if (key == "snr_db") c.snr_db = as_double();
    else if (key == "tau_E") c.tau_E = as_double();
    else if (key == "t_max") c.t_max = as_int();
    else if (key == "seed") c.seed = as_u64();
    else if (key == "cbml_passes") c.cbml_passes = as_int();
    else if (key == "cbml_threshold_scale") c.cbml_threshold_scale = as_double();
    else if (key == "cbml_threshold_abs") c.cbml_threshold_abs = as_double();
    else if (key == "cbml_randomized_order") c.cbml_randomized_order = as_bool();
    else if (key == "sdr_samples") c.sdr_samples = as_int();
    else if (key == "ml_cap") c.ml_cap = as_int();
    else
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                          "'");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

SystemConfig parse_config_text(const std::string& text) {
    SystemConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        assign_key(config, key, value, line_no);
    }
    validate(config);
    return config;
}

SystemConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace imura
