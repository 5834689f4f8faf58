#include "cocotree/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "cocotree/error.hpp"
#include "cocotree/image_ref.hpp"

namespace cocotree {

using nlohmann::json;

const char* dataset_kind_name(DatasetKind kind) {
    return kind == DatasetKind::quadruplet ? "quadruplet" : "pair";
}

namespace {

std::string required_string(const json& record, const char* key) {
    if (!record.contains(key) || !record[key].is_string() ||
        record[key].get<std::string>().empty())
        throw Error(ErrorCode::schema, std::string("missing or empty field '") + key + "'");
    return record[key].get<std::string>();
}

// Relative file references are resolved against the manifest's directory.
std::string resolve_ref(const std::string& ref, const std::filesystem::path& base_dir) {
    if (is_url_ref(ref)) return ref;
    std::filesystem::path path(ref);
    if (path.is_absolute()) return ref;
    return (base_dir / path).lexically_normal().string();
}

QuadrupletSample parse_quadruplet(const json& record, const std::filesystem::path& base_dir) {
    QuadrupletSample sample;
    sample.id = required_string(record, "id");
    sample.image_0 = resolve_ref(required_string(record, "image_0"), base_dir);
    sample.image_1 = resolve_ref(required_string(record, "image_1"), base_dir);
    sample.caption_0 = required_string(record, "caption_0");
    sample.caption_1 = required_string(record, "caption_1");
    if (sample.caption_0 == sample.caption_1)
        throw Error(ErrorCode::schema, "caption_0 equals caption_1");
    if (record.contains("tags")) {
        if (!record["tags"].is_array())
            throw Error(ErrorCode::schema, "tags must be an array of strings");
        for (const json& tag : record["tags"]) sample.tags.push_back(tag.get<std::string>());
    }
    return sample;
}

PairSample parse_pair(const json& record, const std::filesystem::path& base_dir) {
    PairSample sample;
    sample.id = required_string(record, "id");
    sample.image = resolve_ref(required_string(record, "image"), base_dir);
    sample.caption_pos = required_string(record, "caption_pos");
    sample.caption_neg = required_string(record, "caption_neg");
    if (sample.caption_pos == sample.caption_neg)
        throw Error(ErrorCode::schema, "caption_pos equals caption_neg");
    if (record.contains("category")) sample.category = record["category"].get<std::string>();
    return sample;
}

// Seeded subset of k indices out of n, returned in ascending order so the
// dataset keeps its file order.
std::vector<size_t> pick_subset(size_t n, size_t k, std::uint64_t seed) {
    std::vector<size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(indices.begin(), indices.end(), rng);
    indices.resize(k);
    std::sort(indices.begin(), indices.end());
    return indices;
}

template <typename Sample>
void subsample(std::vector<Sample>& samples, size_t k, std::uint64_t seed) {
    if (k >= samples.size()) return;
    std::vector<size_t> keep = pick_subset(samples.size(), k, seed);
    std::vector<Sample> out;
    out.reserve(k);
    for (size_t index : keep) out.push_back(std::move(samples[index]));
    samples = std::move(out);
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& manifest_path, std::uint64_t default_seed) {
    std::ifstream manifest_in(manifest_path);
    if (!manifest_in)
        raise(ErrorCode::dataset, "cannot read dataset manifest: " + manifest_path.string());
    json manifest = json::parse(manifest_in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object())
        raise(ErrorCode::dataset, "dataset manifest is not a JSON object: " +
                                      manifest_path.string());

    Dataset dataset;
    dataset.name = manifest.value("name", manifest_path.stem().string());
    std::string kind = manifest.value("kind", "");
    if (kind == "quadruplet")
        dataset.kind = DatasetKind::quadruplet;
    else if (kind == "pair")
        dataset.kind = DatasetKind::pair;
    else
        raise(ErrorCode::dataset, "manifest kind must be 'quadruplet' or 'pair'");
    if (!manifest.contains("records") || !manifest["records"].is_string())
        raise(ErrorCode::dataset, "manifest lacks a 'records' path");

    std::filesystem::path base_dir = manifest_path.parent_path();
    std::filesystem::path records_path = base_dir / manifest["records"].get<std::string>();
    std::ifstream records(records_path);
    if (!records)
        raise(ErrorCode::dataset, "cannot read dataset records: " + records_path.string());

    std::string line;
    size_t line_number = 0;
    while (std::getline(records, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto skip = [&](const std::string& why) {
            dataset.warnings.push_back("line " + std::to_string(line_number) + " skipped: " +
                                       why);
        };
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            skip("not a JSON object");
            continue;
        }
        try {
            if (dataset.kind == DatasetKind::quadruplet)
                dataset.quadruplets.push_back(parse_quadruplet(record, base_dir));
            else
                dataset.pairs.push_back(parse_pair(record, base_dir));
        } catch (const Error& e) {
            skip(e.what());
        }
    }

    if (dataset.size() == 0)
        raise(ErrorCode::dataset, "dataset has no usable records: " + records_path.string());

    if (manifest.contains("sample_count")) {
        long long requested = manifest["sample_count"].get<long long>();
        if (requested < 1) raise(ErrorCode::dataset, "sample_count must be >= 1");
        std::uint64_t seed = manifest.contains("seed")
                                 ? manifest["seed"].get<std::uint64_t>()
                                 : default_seed;
        if (dataset.kind == DatasetKind::quadruplet)
            subsample(dataset.quadruplets, static_cast<size_t>(requested), seed);
        else
            subsample(dataset.pairs, static_cast<size_t>(requested), seed);
    }
    return dataset;
}

}  // namespace cocotree
