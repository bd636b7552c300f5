#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "sramlet/error.hpp"
#include "sramlet/io.hpp"
#include "sramlet/random.hpp"

namespace sramlet {

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s)
{
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

} // namespace

std::size_t CsvTable::column_index(std::string_view name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw Error("column '" + std::string(name) + "' not found in CSV header");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty())
            break;
    }
    if (trim(line).empty())
        throw Error("'" + path + "' has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
    for (auto field : split(line))
        table.header.emplace_back(unquote(field));
    table.columns.resize(table.header.size());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        ++row;
        const auto fields = split(line);
        if (fields.size() != table.header.size())
            throw Error("row " + std::to_string(row) + " (line " + std::to_string(line_no) + ") has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string_view cell = fields[c];
            double value = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
                !std::isfinite(value))
                throw Error("row " + std::to_string(row) + " (line " + std::to_string(line_no) +
                            "): missing or non-numeric value '" + std::string(cell) + "' in column '" +
                            table.header[c] + "'");
            table.columns[c].push_back(value);
        }
    }
    return table;
}

void write_csv(const std::string& path, std::span<const std::string> header,
               std::span<const std::vector<double>> columns)
{
    if (header.size() != columns.size())
        throw Error("CSV header and column count differ");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns)
        if (col.size() != rows)
            throw Error("CSV columns have different lengths");
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write '" + path + "'");
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << format_double(columns[c][r]);
        out << '\n';
    }
    if (!out)
        throw Error("write to '" + path + "' failed");
}

std::vector<std::size_t> subsample_rows(std::size_t n, std::uint64_t seed)
{
    if (n == 0)
        throw Error("cannot subsample an empty table");
    std::size_t m = 1;
    while (m * 2 <= n)
        m *= 2;
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Rng rng(seed, 0);
    for (std::size_t i = 0; i < m; ++i)
        std::swap(rows[i], rows[i + rng.below(n - i)]);
    rows.resize(m);
    std::sort(rows.begin(), rows.end());
    return rows;
}

Dataset load_csv(const std::string& path, std::string_view response, const LoadOptions& options)
{
    CsvTable table = read_csv(path);
    const std::size_t resp = table.column_index(response);
    if (table.header.size() < 2)
        throw Error("'" + path + "' needs at least one covariate column besides the response");
    std::size_t n = table.rows();
    if (n == 0)
        throw Error("'" + path + "' has no data rows");

    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (options.subsample)
        rows = subsample_rows(n, options.seed);
    else if (!is_power_of_two(n))
        throw Error("'" + path + "' has " + std::to_string(n) +
                    " rows; the sample size must be a power of two (use --subsample to draw a random subset)");
    n = rows.size();

    Dataset data;
    data.X = Matrix(n, table.header.size() - 1);
    data.y.resize(n);
    std::size_t j = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& col = table.columns[c];
        if (c == resp) {
            for (std::size_t i = 0; i < n; ++i)
                data.y[i] = col[rows[i]];
            continue;
        }
        auto dst = data.X.col(j++);
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = col[rows[i]];
        data.names.push_back(table.header[c]);
    }
    data.validate();
    return data;
}

Matrix load_covariates(const std::string& path, std::span<const std::string> names)
{
    const CsvTable table = read_csv(path);
    Matrix X(table.rows(), names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto& col = table.columns[table.column_index(names[j])];
        std::copy(col.begin(), col.end(), X.col(j).begin());
    }
    return X;
}

} // namespace sramlet
