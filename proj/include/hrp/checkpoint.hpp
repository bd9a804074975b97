#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hrp/gpr.hpp"
#include "hrp/preprocess.hpp"
#include "hrp/temporal.hpp"

namespace hrp {

std::string base64_encode(const unsigned char* data, std::size_t n);
std::vector<unsigned char> base64_decode(const std::string& text);

// Line-oriented model container. One record per line:
//   hrp-container 1 <kind>
//   format float64 little-endian row-major
//   scalar <name> <value>
//   vector <name> <size> <base64>
//   matrix <name> <rows> <cols> <base64>
// Array payloads are raw little-endian doubles, row-major, base64-encoded, so
// files are text-diffable while round-tripping bit-exactly.
class Container {
public:
    explicit Container(std::string kind = "") : kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

    void set_scalar(const std::string& name, const std::string& value);
    void set_scalar(const std::string& name, double value);
    void set_scalar(const std::string& name, std::int64_t value);
    void set_scalar(const std::string& name, std::uint64_t value);
    void set_vector(const std::string& name, const Eigen::VectorXd& v);
    void set_matrix(const std::string& name, const Eigen::MatrixXd& m);

    std::string get_string(const std::string& name) const;
    double get_double(const std::string& name) const;
    std::int64_t get_int(const std::string& name) const;
    std::uint64_t get_u64(const std::string& name) const;
    Eigen::VectorXd get_vector(const std::string& name) const;
    Eigen::MatrixXd get_matrix(const std::string& name) const;

    void save(std::ostream& out) const;
    static Container load(std::istream& in);

private:
    std::string kind_;
    std::vector<std::string> order_; // emission order, for stable files
    std::map<std::string, std::string> scalars_;
    std::map<std::string, Eigen::MatrixXd> arrays_; // vectors stored as n x 1
    std::map<std::string, bool> is_vector_;
};

// The extractor checkpoint bundles everything prediction needs: the recurrent
// cell and readout, the training configuration, the preprocessing configuration
// and the normalization statistics fitted at training time.
struct ExtractorCheckpoint {
    ExtractorModel model;
    TrainConfig train_config;
    PreprocessConfig preprocess;
    NormalizationStats stats;
};

void save_extractor(const std::string& path, const ExtractorCheckpoint& ckpt);
ExtractorCheckpoint load_extractor(const std::string& path);

void save_gp(const std::string& path, const GPModel& model);
GPModel load_gp(const std::string& path);

} // namespace hrp
