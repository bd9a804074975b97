#include "hrp/checkpoint.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hrp/errors.hpp"
#include "hrp/util.hpp"

namespace hrp {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

} // namespace

std::string base64_encode(const unsigned char* data, std::size_t n) {
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    for (std::size_t i = 0; i < n; i += 3) {
        const unsigned b0 = data[i];
        const unsigned b1 = i + 1 < n ? data[i + 1] : 0;
        const unsigned b2 = i + 2 < n ? data[i + 2] : 0;
        out.push_back(kAlphabet[b0 >> 2]);
        out.push_back(kAlphabet[((b0 & 0x3) << 4) | (b1 >> 4)]);
        out.push_back(i + 1 < n ? kAlphabet[((b1 & 0xF) << 2) | (b2 >> 6)] : '=');
        out.push_back(i + 2 < n ? kAlphabet[b2 & 0x3F] : '=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    static const auto value_of = [] {
        std::array<int, 256> table{};
        table.fill(-1);
        for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = i;
        return table;
    }();

    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    int acc = 0;
    int bits = 0;
    for (const char c : text) {
        if (c == '=') break;
        const int v = value_of[static_cast<unsigned char>(c)];
        if (v < 0) throw Error("base64: invalid character");
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

namespace {

std::string encode_doubles(const double* data, std::size_t n) {
    return base64_encode(reinterpret_cast<const unsigned char*>(data), n * sizeof(double));
}

std::vector<double> decode_doubles(const std::string& text, std::size_t expected) {
    const auto bytes = base64_decode(text);
    if (bytes.size() != expected * sizeof(double))
        throw Error("container: array payload has wrong size");
    std::vector<double> out(expected);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

} // namespace

void Container::set_scalar(const std::string& name, const std::string& value) {
    if (!scalars_.count(name) && !arrays_.count(name)) order_.push_back(name);
    scalars_[name] = value;
}

void Container::set_scalar(const std::string& name, double value) {
    set_scalar(name, fmt_double(value));
}

void Container::set_scalar(const std::string& name, std::int64_t value) {
    set_scalar(name, std::to_string(value));
}

void Container::set_scalar(const std::string& name, std::uint64_t value) {
    set_scalar(name, std::to_string(value));
}

void Container::set_vector(const std::string& name, const Eigen::VectorXd& v) {
    if (!scalars_.count(name) && !arrays_.count(name)) order_.push_back(name);
    arrays_[name] = v;
    is_vector_[name] = true;
}

void Container::set_matrix(const std::string& name, const Eigen::MatrixXd& m) {
    if (!scalars_.count(name) && !arrays_.count(name)) order_.push_back(name);
    arrays_[name] = m;
    is_vector_[name] = false;
}

std::string Container::get_string(const std::string& name) const {
    const auto it = scalars_.find(name);
    if (it == scalars_.end()) throw Error("container: missing scalar '" + name + "'");
    return it->second;
}

double Container::get_double(const std::string& name) const {
    bool ok = false;
    const double v = parse_double(get_string(name), ok);
    if (!ok) throw Error("container: scalar '" + name + "' is not numeric");
    return v;
}

std::int64_t Container::get_int(const std::string& name) const {
    const std::string s = get_string(name);
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("container: scalar '" + name + "' is not an integer");
    return v;
}

std::uint64_t Container::get_u64(const std::string& name) const {
    const std::string s = get_string(name);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("container: scalar '" + name + "' is not an unsigned integer");
    return v;
}

Eigen::VectorXd Container::get_vector(const std::string& name) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw Error("container: missing vector '" + name + "'");
    if (it->second.cols() != 1) throw Error("container: '" + name + "' is not a vector");
    return it->second.col(0);
}

Eigen::MatrixXd Container::get_matrix(const std::string& name) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw Error("container: missing matrix '" + name + "'");
    return it->second;
}

void Container::save(std::ostream& out) const {
    out << "hrp-container 1 " << kind_ << '\n';
    out << "format float64 little-endian row-major\n";
    for (const auto& name : order_) {
        if (const auto s = scalars_.find(name); s != scalars_.end()) {
            out << "scalar " << name << ' ' << s->second << '\n';
            continue;
        }
        const auto& m = arrays_.at(name);
        // row-major payload
        std::vector<double> flat(static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                flat[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
        if (is_vector_.at(name))
            out << "vector " << name << ' ' << m.rows() << ' '
                << encode_doubles(flat.data(), flat.size()) << '\n';
        else
            out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << ' '
                << encode_doubles(flat.data(), flat.size()) << '\n';
    }
}

Container Container::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("container: empty stream");
    std::istringstream header(line);
    std::string magic;
    int version = 0;
    std::string kind;
    header >> magic >> version >> kind;
    if (magic != "hrp-container" || version != 1)
        throw Error("container: unrecognized header '" + line + "'");
    if (!std::getline(in, line) || line != "format float64 little-endian row-major")
        throw Error("container: unsupported format line");

    Container c(kind);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag, name;
        ss >> tag >> name;
        if (tag == "scalar") {
            std::string value;
            std::getline(ss, value);
            const auto pos = value.find_first_not_of(' ');
            c.set_scalar(name, pos == std::string::npos ? std::string() : value.substr(pos));
        } else if (tag == "vector") {
            Eigen::Index n = 0;
            std::string payload;
            ss >> n >> payload;
            const auto flat = decode_doubles(payload, static_cast<std::size_t>(n));
            Eigen::VectorXd v(n);
            for (Eigen::Index i = 0; i < n; ++i) v(i) = flat[static_cast<std::size_t>(i)];
            c.set_vector(name, v);
        } else if (tag == "matrix") {
            Eigen::Index rows = 0, cols = 0;
            std::string payload;
            ss >> rows >> cols >> payload;
            const auto flat = decode_doubles(payload, static_cast<std::size_t>(rows * cols));
            Eigen::MatrixXd m(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index col = 0; col < cols; ++col)
                    m(r, col) = flat[static_cast<std::size_t>(r * cols + col)];
            c.set_matrix(name, m);
        } else {
            throw Error("container: unknown record '" + tag + "'");
        }
    }
    return c;
}

namespace {

Container load_container_file(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    Container c = Container::load(in);
    if (c.kind() != expected_kind)
        throw ConfigError("checkpoint " + path + " has kind '" + c.kind() + "', expected '" +
                          expected_kind + "'");
    return c;
}

void save_container_file(const std::string& path, const Container& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    c.save(out);
    if (!out) throw ConfigError("checkpoint write failed: " + path);
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    return out;
}

} // namespace

void save_extractor(const std::string& path, const ExtractorCheckpoint& ckpt) {
    Container c("extractor");
    c.set_scalar("hidden_size", static_cast<std::int64_t>(ckpt.model.hidden_size));
    c.set_scalar("n_features", static_cast<std::int64_t>(ckpt.model.n_features));
    c.set_matrix("w_forget", ckpt.model.cell.w_forget);
    c.set_matrix("w_input", ckpt.model.cell.w_input);
    c.set_matrix("w_cell", ckpt.model.cell.w_cell);
    c.set_matrix("w_output", ckpt.model.cell.w_output);
    c.set_vector("b_forget", ckpt.model.cell.b_forget);
    c.set_vector("b_input", ckpt.model.cell.b_input);
    c.set_vector("b_cell", ckpt.model.cell.b_cell);
    c.set_vector("b_output", ckpt.model.cell.b_output);
    c.set_vector("readout_weight", ckpt.model.readout_weight);
    c.set_scalar("readout_bias", ckpt.model.readout_bias);

    c.set_scalar("train.learning_rate", ckpt.train_config.learning_rate);
    c.set_scalar("train.epochs", static_cast<std::int64_t>(ckpt.train_config.epochs));
    c.set_scalar("train.batch_size", static_cast<std::int64_t>(ckpt.train_config.batch_size));
    c.set_scalar("train.huber_delta", ckpt.train_config.huber_delta);
    c.set_scalar("train.seed", static_cast<std::uint64_t>(ckpt.train_config.seed));
    c.set_scalar("train.optimizer", optimizer_name(ckpt.train_config.optimizer));

    c.set_scalar("preprocess.sensors", join_ints(ckpt.preprocess.sensors()));
    c.set_scalar("preprocess.rul_cap", static_cast<std::int64_t>(ckpt.preprocess.rul_cap));
    c.set_scalar("preprocess.smoothing_s", ckpt.preprocess.smoothing_s);
    c.set_scalar("preprocess.window_length",
                 static_cast<std::int64_t>(ckpt.preprocess.window_length));
    c.set_scalar("preprocess.stride", static_cast<std::int64_t>(ckpt.preprocess.stride));
    c.set_scalar("preprocess.pooled_normalization",
                 static_cast<std::int64_t>(ckpt.preprocess.pooled_normalization ? 1 : 0));

    c.set_scalar("stats.sensors", join_ints(ckpt.stats.sensor_ids));
    c.set_vector("stats.mean", ckpt.stats.mean);
    c.set_vector("stats.stddev", ckpt.stats.stddev);

    save_container_file(path, c);
}

ExtractorCheckpoint load_extractor(const std::string& path) {
    const Container c = load_container_file(path, "extractor");
    ExtractorCheckpoint ckpt;
    ckpt.model.hidden_size = static_cast<int>(c.get_int("hidden_size"));
    ckpt.model.n_features = static_cast<int>(c.get_int("n_features"));
    ckpt.model.cell.w_forget = c.get_matrix("w_forget");
    ckpt.model.cell.w_input = c.get_matrix("w_input");
    ckpt.model.cell.w_cell = c.get_matrix("w_cell");
    ckpt.model.cell.w_output = c.get_matrix("w_output");
    ckpt.model.cell.b_forget = c.get_vector("b_forget");
    ckpt.model.cell.b_input = c.get_vector("b_input");
    ckpt.model.cell.b_cell = c.get_vector("b_cell");
    ckpt.model.cell.b_output = c.get_vector("b_output");
    ckpt.model.readout_weight = c.get_vector("readout_weight");
    ckpt.model.readout_bias = c.get_double("readout_bias");
    ckpt.model.cell.check_consistent();

    ckpt.train_config.hidden_size = ckpt.model.hidden_size;
    ckpt.train_config.learning_rate = c.get_double("train.learning_rate");
    ckpt.train_config.epochs = static_cast<int>(c.get_int("train.epochs"));
    ckpt.train_config.batch_size = static_cast<int>(c.get_int("train.batch_size"));
    ckpt.train_config.huber_delta = c.get_double("train.huber_delta");
    ckpt.train_config.seed = c.get_u64("train.seed");
    ckpt.train_config.optimizer = optimizer_from_string(c.get_string("train.optimizer"));

    ckpt.preprocess.selected_sensors = split_ints(c.get_string("preprocess.sensors"));
    ckpt.preprocess.rul_cap = static_cast<int>(c.get_int("preprocess.rul_cap"));
    ckpt.preprocess.smoothing_s = c.get_double("preprocess.smoothing_s");
    ckpt.preprocess.window_length = static_cast<int>(c.get_int("preprocess.window_length"));
    ckpt.preprocess.stride = static_cast<int>(c.get_int("preprocess.stride"));
    ckpt.preprocess.pooled_normalization = c.get_int("preprocess.pooled_normalization") != 0;

    ckpt.stats.sensor_ids = split_ints(c.get_string("stats.sensors"));
    ckpt.stats.mean = c.get_vector("stats.mean");
    ckpt.stats.stddev = c.get_vector("stats.stddev");
    return ckpt;
}

void save_gp(const std::string& path, const GPModel& model) {
    Container c("gp");
    c.set_scalar("amplitude", model.kernel.amplitude);
    c.set_scalar("length_scale", model.kernel.length_scale);
    c.set_scalar("noise_std", model.noise.noise_std);
    c.set_scalar("jitter", model.jitter);
    c.set_matrix("train_inputs", model.train_inputs);
    c.set_vector("targets", model.targets);
    save_container_file(path, c);
}

GPModel load_gp(const std::string& path) {
    const Container c = load_container_file(path, "gp");
    const KernelParams kernel{c.get_double("amplitude"), c.get_double("length_scale")};
    const NoiseParam noise{c.get_double("noise_std")};
    // Refitting with the recorded jitter reproduces the cached factor exactly.
    return fit_gp(c.get_matrix("train_inputs"), c.get_vector("targets"), kernel, noise,
                  c.get_double("jitter"));
}

} // namespace hrp
