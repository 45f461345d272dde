#include "rgp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rgp/format.hpp"

namespace rgp {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = strip(item); !t.empty()) out.push_back(t);
    return out;
}

std::string opt_key(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }

std::optional<double> parse_opt(const std::string& key, const std::string& value) {
    if (value == "auto") return std::nullopt;
    return parse_real(key, value);
}

}  // namespace

double parse_real(const std::string& key, const std::string& value) {
    const auto v = parse_double(value);
    if (!v || !std::isfinite(*v)) throw InvalidArgument(key + ": expected a number, got '" + value + "'");
    return *v;
}

long long parse_integer(const std::string& key, const std::string& value) {
    const std::string s = strip(value);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw InvalidArgument(key + ": expected an integer, got '" + value + "'");
    return v;
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(source + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = strip(line.substr(0, eq));
        if (key.empty()) throw InvalidArgument(source + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = strip(line.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    return parse_key_values(in, path.string());
}

KeyValues apply_train_keys(TrainConfig& cfg, const KeyValues& kv) {
    KeyValues rest;
    for (const auto& [key, value] : kv) {
        if (key == "objective") cfg.objective = parse_objective(value);
        else if (key == "lambda") cfg.lambda = parse_real(key, value);
        else if (key == "epsilon") cfg.epsilon = parse_real(key, value);
        else if (key == "lr") cfg.lr = parse_real(key, value);
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_integer(key, value));
        else if (key == "epochs") cfg.epochs = static_cast<int>(parse_integer(key, value));
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(key, value));
        else if (key == "target") cfg.target_kind = parse_target_kind(value);
        else if (key == "latent_dim") cfg.latent_dim = static_cast<int>(parse_integer(key, value));
        else if (key == "radius") cfg.radius = parse_opt(key, value);
        else if (key == "inner_radius") cfg.inner_radius = parse_opt(key, value);
        else if (key == "gamma") cfg.gamma = parse_opt(key, value);
        else if (key == "leaky_slope") cfg.leaky_slope = parse_real(key, value);
        else if (key == "sinkhorn_max_iter") cfg.sinkhorn_max_iter = static_cast<int>(parse_integer(key, value));
        else if (key == "sinkhorn_tol") cfg.sinkhorn_tol = parse_real(key, value);
        else rest[key] = value;
    }
    return rest;
}

KeyValues train_config_keys(const TrainConfig& cfg) {
    return {
        {"objective", to_string(cfg.objective)},
        {"lambda", format_double(cfg.lambda)},
        {"epsilon", format_double(cfg.epsilon)},
        {"lr", format_double(cfg.lr)},
        {"batch_size", std::to_string(cfg.batch_size)},
        {"epochs", std::to_string(cfg.epochs)},
        {"seed", std::to_string(cfg.seed)},
        {"target", to_string(cfg.target_kind)},
        {"latent_dim", std::to_string(cfg.latent_dim)},
        {"radius", opt_key(cfg.radius)},
        {"inner_radius", opt_key(cfg.inner_radius)},
        {"gamma", opt_key(cfg.gamma)},
        {"leaky_slope", format_double(cfg.leaky_slope)},
        {"sinkhorn_max_iter", std::to_string(cfg.sinkhorn_max_iter)},
        {"sinkhorn_tol", format_double(cfg.sinkhorn_tol)},
    };
}

Manifest parse_manifest(const KeyValues& kv, const std::filesystem::path& base_dir, const std::string& name) {
    Manifest m;
    m.name = name;
    const KeyValues rest = apply_train_keys(m.train, kv);
    for (const auto& [key, value] : rest) {
        if (key == "name") m.name = value;
        else if (key == "data") m.data = base_dir / value;
        else if (key == "label_column") m.schema.label_column = value;
        else if (key == "abnormal_values") m.schema.abnormal_values = split_list(value);
        else if (key == "normal_values") m.schema.normal_values = split_list(value);
        else if (key == "delimiter") {
            require(value.size() == 1, "delimiter must be a single character");
            m.schema.delimiter = value[0];
        } else if (key == "has_header") {
            require(value == "true" || value == "false", "has_header must be true or false");
            m.schema.has_header = value == "true";
        } else if (key == "train_fraction") m.train_fraction = parse_real(key, value);
        else if (key == "k") m.k = static_cast<int>(parse_integer(key, value));
        else if (key == "p") m.p = parse_real(key, value);
        else if (key == "mode") m.mode = parse_score_mode(value);
        else if (key == "f1_positive") m.f1_positive = parse_label(value);
        else throw InvalidArgument("unknown manifest key '" + key + "'");
    }
    require(!m.data.empty(), "manifest is missing 'data'");
    require(m.k >= 1, "k must be >= 1");
    require(m.p > 0.0 && m.p < 1.0, "p must lie in (0, 1)");
    m.train.validate();
    return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_key_values(path), path.parent_path(), path.stem().string());
}

}  // namespace rgp
