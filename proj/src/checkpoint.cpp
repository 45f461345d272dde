#include "rgp/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "rgp/format.hpp"

namespace rgp {

namespace {

constexpr const char* kMagic = "rgp-checkpoint";

[[noreturn]] void corrupt(const std::string& what) { throw InvalidArgument("malformed checkpoint: " + what); }

std::string next_line(std::istream& in, const std::string& expecting) {
    std::string line;
    if (!std::getline(in, line)) corrupt("unexpected end of file, expecting " + expecting);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string t;
    while (ss >> t) out.push_back(t);
    return out;
}

long long to_int(const std::string& s) {
    try {
        return parse_integer("checkpoint", s);
    } catch (const InvalidArgument&) {
        corrupt("bad integer '" + s + "'");
    }
}

double to_real(const std::string& s) {
    const auto v = parse_double(s);
    if (!v) corrupt("bad number '" + s + "'");
    return *v;
}

template <typename Row>
void write_values(std::ostream& out, const char* tag, const Row& values) {
    out << tag;
    for (Eigen::Index i = 0; i < values.size(); ++i) out << ' ' << format_double(values[i]);
    out << '\n';
}

std::vector<double> read_values(std::istream& in, const std::string& tag, std::size_t count) {
    const auto t = tokens(next_line(in, tag));
    if (t.empty() || t[0] != tag) corrupt("expected '" + tag + "' line");
    if (t.size() != count + 1)
        corrupt("'" + tag + "' line has " + std::to_string(t.size() - 1) + " values, expected " +
                std::to_string(count));
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 1; i < t.size(); ++i) out.push_back(to_real(t[i]));
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_mlp(std::ostream& out, const std::string& name, const MlpParams& params) {
    out << "network " << name << ' ' << params.layers.size() << '\n';
    for (const auto& L : params.layers) {
        out << "layer " << L.W.cols() << ' ' << L.W.rows() << ' ' << to_string(L.act) << '\n';
        out << 'W';
        for (Eigen::Index i = 0; i < L.W.rows(); ++i)
            for (Eigen::Index j = 0; j < L.W.cols(); ++j) out << ' ' << format_double(L.W(i, j));
        out << '\n';
        write_values(out, "b", L.b);
    }
}

MlpParams read_mlp(std::istream& in, const std::string& name) {
    const auto head = tokens(next_line(in, "network " + name));
    if (head.size() != 3 || head[0] != "network" || head[1] != name) corrupt("expected 'network " + name + "'");
    const auto n_layers = to_int(head[2]);
    if (n_layers < 1) corrupt("network " + name + " has no layers");
    MlpParams p;
    for (long long l = 0; l < n_layers; ++l) {
        const auto t = tokens(next_line(in, "layer"));
        if (t.size() != 4 || t[0] != "layer") corrupt("expected 'layer <in> <out> <activation>'");
        const auto in_dim = to_int(t[1]), out_dim = to_int(t[2]);
        if (in_dim < 1 || out_dim < 1) corrupt("layer dims must be positive");
        Layer L{Matrix(out_dim, in_dim), Vector(out_dim), parse_activation(t[3])};
        const auto w = read_values(in, "W", static_cast<std::size_t>(in_dim * out_dim));
        for (Eigen::Index i = 0; i < out_dim; ++i)
            for (Eigen::Index j = 0; j < in_dim; ++j) L.W(i, j) = w[static_cast<std::size_t>(i * in_dim + j)];
        L.b = to_vector(read_values(in, "b", static_cast<std::size_t>(out_dim)));
        p.layers.push_back(std::move(L));
    }
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        corrupt(e.what());
    }
    return p;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    out << kMagic << ' ' << kCheckpointVersion << '\n';
    for (const auto& [k, v] : train_config_keys(ckpt.config)) out << "config." << k << '=' << v << '\n';
    for (const auto& [k, v] : ckpt.meta) out << "meta." << k << '=' << v << '\n';
    out << "target.kind=" << to_string(ckpt.target.kind) << '\n'
        << "target.dim=" << ckpt.target.dim << '\n'
        << "target.radius=" << format_double(ckpt.target.radius) << '\n'
        << "target.inner_radius=" << format_double(ckpt.target.inner_radius) << '\n'
        << "kernel.gamma=" << format_double(ckpt.kernel.gamma) << '\n';
    const auto& s = ckpt.standardizer;
    out << "standardizer.input_columns=" << join(s.input_columns) << '\n';
    std::vector<std::string> kept;
    for (auto j : s.kept) kept.push_back(std::to_string(j));
    out << "standardizer.kept=" << join(kept) << '\n';
    out << "end-header\n";
    write_values(out, "means", s.means);
    write_values(out, "stds", s.stds);
    write_mlp(out, "encoder", ckpt.encoder);
    write_mlp(out, "decoder", ckpt.decoder);
    const Matrix& P = ckpt.projected_train;
    out << "projected " << P.rows() << ' ' << P.cols() << '\n';
    for (Eigen::Index i = 0; i < P.rows(); ++i) write_values(out, "z", P.row(i));
    out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
    const auto magic = tokens(next_line(in, "version line"));
    if (magic.size() != 2 || magic[0] != kMagic) corrupt("missing '" + std::string(kMagic) + "' line");
    if (to_int(magic[1]) != kCheckpointVersion) corrupt("unsupported version " + magic[1]);

    Checkpoint ck;
    KeyValues config, header;
    for (;;) {
        const std::string line = next_line(in, "end-header");
        if (line == "end-header") break;
        const auto eq = line.find('=');
        if (eq == std::string::npos) corrupt("header line without '=': " + line);
        const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key.rfind("config.", 0) == 0) config[key.substr(7)] = value;
        else if (key.rfind("meta.", 0) == 0) ck.meta[key.substr(5)] = value;
        else header[key] = value;
    }
    try {
        const KeyValues rest = apply_train_keys(ck.config, config);
        if (!rest.empty()) corrupt("unknown config key '" + rest.begin()->first + "'");
        const auto get = [&](const std::string& k) {
            const auto it = header.find(k);
            if (it == header.end()) corrupt("missing header key '" + k + "'");
            return it->second;
        };
        ck.target = TargetSpec::make(parse_target_kind(get("target.kind")), static_cast<int>(to_int(get("target.dim"))),
                                     to_real(get("target.radius")), to_real(get("target.inner_radius")));
        ck.kernel = KernelConfig::make(to_real(get("kernel.gamma")));
        ck.standardizer.input_columns = split_commas(get("standardizer.input_columns"));
        for (const auto& j : split_commas(get("standardizer.kept"))) ck.standardizer.kept.push_back(to_int(j));
    } catch (const InvalidArgument& e) {
        const std::string what = e.what();
        if (what.rfind("malformed checkpoint", 0) == 0) throw;
        corrupt(what);
    }
    auto& s = ck.standardizer;
    for (auto j : s.kept)
        if (j < 0 || j >= static_cast<Eigen::Index>(s.input_columns.size())) corrupt("kept column out of range");
    s.means = to_vector(read_values(in, "means", s.kept.size()));
    s.stds = to_vector(read_values(in, "stds", s.kept.size()));
    ck.encoder = read_mlp(in, "encoder");
    ck.decoder = read_mlp(in, "decoder");

    const auto t = tokens(next_line(in, "projected"));
    if (t.size() != 3 || t[0] != "projected") corrupt("expected 'projected <rows> <cols>'");
    const auto rows = to_int(t[1]), cols = to_int(t[2]);
    if (rows < 0 || cols != ck.target.dim) corrupt("projected matrix shape does not match target dim");
    ck.projected_train.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        ck.projected_train.row(i) = to_vector(read_values(in, "z", static_cast<std::size_t>(cols))).transpose();
    if (next_line(in, "end") != "end") corrupt("expected 'end'");

    if (ck.encoder.in_dim() != static_cast<Eigen::Index>(s.kept.size()) || ck.encoder.out_dim() != ck.target.dim ||
        ck.decoder.in_dim() != ck.target.dim || ck.decoder.out_dim() != ck.encoder.in_dim())
        corrupt("network dims do not match standardizer/target");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    write_checkpoint(out, ckpt);
    if (!out) throw InvalidArgument("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    return read_checkpoint(in);
}

}  // namespace rgp
