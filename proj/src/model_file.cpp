#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#include "sramlet/error.hpp"
#include "sramlet/io.hpp"

namespace sramlet {

namespace {

using nlohmann::json;

constexpr std::string_view kFormat = "sramlet-model";

std::string block_kind_name(const Block& blk)
{
    return blk.kind == BlockKind::Linear ? "linear" : std::string(to_string(blk.family));
}

} // namespace

std::string model_to_json(const AdditiveFit& fit, const BlockDesign& design, std::span<const std::string> names,
                          const ModelInfo& info)
{
    if (fit.coefs.size() != design.blocks().size())
        throw Error("fit does not match the design's block count");
    if (!names.empty() && names.size() != design.p())
        throw Error("name count does not match the covariate count");

    // covariate -> blocks with their coefficients, only where some block is nonzero
    std::map<std::size_t, std::vector<std::size_t>> by_covariate;
    for (std::size_t k = 0; k < design.blocks().size(); ++k)
        by_covariate[design.block(k).covariate].push_back(k);

    json covariates = json::array();
    for (const auto& [j, blocks] : by_covariate) {
        bool active = false;
        for (std::size_t k : blocks)
            active = active || !fit.coefs[k].empty();
        if (!active)
            continue;
        json entry;
        entry["index"] = j;
        entry["name"] = names.empty() ? "x" + std::to_string(j + 1) : names[j];
        const auto sorted = design.sorted_values(j);
        entry["sorted_x"] = std::vector<double>(sorted.begin(), sorted.end());
        json jblocks = json::array();
        for (std::size_t k : blocks)
            jblocks.push_back({{"kind", block_kind_name(design.block(k))},
                               {"index", fit.coefs[k].index},
                               {"value", fit.coefs[k].value}});
        entry["blocks"] = std::move(jblocks);
        covariates.push_back(std::move(entry));
    }

    json doc;
    doc["format"] = kFormat;
    doc["version"] = ModelFile::kVersion;
    doc["n"] = design.n();
    doc["p"] = design.p();
    doc["mode"] = to_string(design.options().mode);
    doc["family"] = to_string(design.options().family);
    doc["loss"] = to_string(fit.loss);
    doc["columns"] = std::vector<std::string>(names.begin(), names.end());
    doc["intercept"] = fit.intercept;
    doc["lambda"] = fit.lambda;
    doc["rule"] = {{"name", info.rule},
                   {"alpha", info.alpha},
                   {"mc_samples", info.mc_samples},
                   {"lambda_zero", info.lambda_zero}};
    doc["rng"] = {{"generator", info.generator}, {"seed", info.seed}};
    doc["diagnostics"] = {{"sweeps", fit.sweeps},
                          {"objective", fit.objective},
                          {"converged", fit.converged},
                          {"sigma_hat", fit.sigma_hat},
                          {"effective_threshold", fit.effective_threshold}};
    doc["covariates"] = std::move(covariates);
    return doc.dump(1) + "\n";
}

void save_model(const std::string& path, const AdditiveFit& fit, const BlockDesign& design,
                std::span<const std::string> names, const ModelInfo& info)
{
    const std::string text = model_to_json(fit, design, names, info);
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw Error("write to '" + path + "' failed");
}

ModelFile model_from_json(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("corrupt model file: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", std::string()) != kFormat)
            throw Error("not a sramlet model file");
        const int version = doc.at("version").get<int>();
        if (version != ModelFile::kVersion)
            throw Error("model file version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(ModelFile::kVersion) + ")");

        ModelFile model;
        model.n = doc.at("n").get<std::size_t>();
        const auto p = doc.at("p").get<std::size_t>();
        model.options.mode = parse_mode(doc.at("mode").get<std::string>());
        model.options.family = parse_family(doc.at("family").get<std::string>());
        model.names = doc.at("columns").get<std::vector<std::string>>();
        if (model.names.size() != p)
            throw Error("model lists " + std::to_string(model.names.size()) + " column names for p = " +
                        std::to_string(p));

        AdditiveFit& fit = model.fit;
        fit.loss = parse_loss(doc.at("loss").get<std::string>());
        fit.intercept = doc.at("intercept").get<double>();
        fit.lambda = doc.at("lambda").get<double>();
        const json& diag = doc.at("diagnostics");
        fit.sweeps = diag.at("sweeps").get<std::size_t>();
        fit.objective = diag.at("objective").get<double>();
        fit.converged = diag.at("converged").get<bool>();
        fit.sigma_hat = diag.at("sigma_hat").get<double>();
        fit.effective_threshold = diag.at("effective_threshold").get<double>();

        const json& rule = doc.at("rule");
        model.info.rule = rule.at("name").get<std::string>();
        model.info.alpha = rule.at("alpha").get<double>();
        model.info.mc_samples = rule.at("mc_samples").get<std::size_t>();
        model.info.lambda_zero = rule.at("lambda_zero").get<double>();
        model.info.generator = doc.at("rng").at("generator").get<std::string>();
        model.info.seed = doc.at("rng").at("seed").get<std::uint64_t>();

        std::vector<std::optional<std::vector<double>>> sorted(p);
        std::map<std::size_t, const json*> entries;
        for (const json& entry : doc.at("covariates")) {
            const auto j = entry.at("index").get<std::size_t>();
            if (j >= p || sorted[j])
                throw Error("covariate index " + std::to_string(j) + " is out of range or repeated");
            sorted[j] = entry.at("sorted_x").get<std::vector<double>>();
            entries[j] = &entry;
        }
        model.design = BlockDesign::from_sorted_values(model.n, p, std::move(sorted), model.options);
        const BlockDesign& design = *model.design;

        fit.coefs.resize(design.blocks().size());
        std::map<std::size_t, std::size_t> next_block;
        for (std::size_t k = 0; k < design.blocks().size(); ++k) {
            const Block& blk = design.block(k);
            const json& blocks = entries.at(blk.covariate)->at("blocks");
            const std::size_t slot = next_block[blk.covariate]++;
            if (slot >= blocks.size())
                throw Error("covariate " + std::to_string(blk.covariate) + " is missing block coefficients");
            const json& jb = blocks.at(slot);
            if (jb.at("kind").get<std::string>() != block_kind_name(blk))
                throw Error("block kind mismatch for covariate " + std::to_string(blk.covariate));
            SparseCoefs& c = fit.coefs[k];
            c.index = jb.at("index").get<std::vector<std::uint32_t>>();
            c.value = jb.at("value").get<std::vector<double>>();
            if (c.index.size() != c.value.size())
                throw Error("block index and value lengths differ");
            for (std::size_t i = 0; i < c.index.size(); ++i)
                if (c.index[i] >= design.block_size(k) || (i > 0 && c.index[i] <= c.index[i - 1]))
                    throw Error("block coefficient indices are invalid");
        }
        return model;
    } catch (const json::exception& e) {
        throw Error(std::string("corrupt model file: ") + e.what());
    }
}

ModelFile load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open model '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

} // namespace sramlet
