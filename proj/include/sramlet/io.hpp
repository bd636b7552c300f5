#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sramlet/design.hpp"
#include "sramlet/solver.hpp"

namespace sramlet {

/// 17 significant digits; parses back to the same double.
std::string format_double(double value);

/// Numeric CSV with a header row, columns kept in file order.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t column_index(std::string_view name) const; // throws if absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, std::span<const std::string> header,
               std::span<const std::vector<double>> columns);

/// Row indices (ascending) of a seeded sample without replacement of size
/// the largest power of two <= n.
std::vector<std::size_t> subsample_rows(std::size_t n, std::uint64_t seed);

struct LoadOptions
{
    bool subsample = false;
    std::uint64_t seed = 0;
};

/// Response column plus every other column as a covariate.
Dataset load_csv(const std::string& path, std::string_view response, const LoadOptions& options = {});

/// Columns picked by name, in the given order; any row count.
Matrix load_covariates(const std::string& path, std::span<const std::string> names);

struct ModelInfo
{
    std::string rule = "fixed"; // qut, sure or fixed
    double alpha = 0.0;
    std::size_t mc_samples = 0;
    std::uint64_t seed = 0;
    std::string generator;
    double lambda_zero = 0.0;
};

struct ModelFile
{
    static constexpr int kVersion = 1;

    std::vector<std::string> names; // all p covariate names
    DesignOptions options;
    std::size_t n = 0;
    AdditiveFit fit; // coefficients follow design's block order
    ModelInfo info;
    std::optional<BlockDesign> design; // active covariates only
};

/// Serializes the fit with the sorted training values of active covariates.
void save_model(const std::string& path, const AdditiveFit& fit, const BlockDesign& design,
                std::span<const std::string> names, const ModelInfo& info);
std::string model_to_json(const AdditiveFit& fit, const BlockDesign& design, std::span<const std::string> names,
                          const ModelInfo& info);

ModelFile load_model(const std::string& path);
ModelFile model_from_json(std::string_view text);

} // namespace sramlet
