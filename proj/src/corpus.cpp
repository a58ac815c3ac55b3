// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "uxexplain/rng.hpp"

namespace uxexplain {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

[[noreturn]] void fail_at(const std::filesystem::path& path, size_t line,
                          const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

} // namespace

std::string_view to_string(HoneycombDimension d) {
    switch (d) {
        case HoneycombDimension::Usability: return "Usability";
        case HoneycombDimension::Usefulness: return "Usefulness";
        case HoneycombDimension::Desirability: return "Desirability";
        case HoneycombDimension::Findability: return "Findability";
        case HoneycombDimension::Accessibility: return "Accessibility";
        case HoneycombDimension::Credibility: return "Credibility";
    }
    return "Usability";
}

std::string dimension_key(HoneycombDimension d) {
    std::string s{to_string(d)};
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

HoneycombDimension parse_dimension(std::string_view name) {
    for (HoneycombDimension d : kAllDimensions) {
        if (name == to_string(d)) return d;
    }
    throw std::invalid_argument("unknown dimension \"" + std::string(name) + "\"");
}

std::string_view to_string(SatisfactionLabel l) {
    return l == SatisfactionLabel::Satisfied ? "Satisfied" : "Unsatisfied";
}

void validate_corpus(const Corpus& c) {
    std::unordered_set<std::string_view> seen;
    for (const SurveyRecord& r : c.records) {
        if (r.id.empty()) {
            throw std::invalid_argument("record with empty id");
        }
        if (is_blank(r.text)) {
            throw std::invalid_argument("record \"" + r.id + "\" has blank text");
        }
        if (!seen.insert(r.id).second) {
            throw std::invalid_argument("duplicate id \"" + r.id + "\"");
        }
    }
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open corpus file " + path.string());
    }

    Corpus corpus;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;

        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail_at(path, line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) fail_at(path, line_no, "record is not a JSON object");

        SurveyRecord rec;
        try {
            if (!j.contains("id") || !j["id"].is_string()) {
                throw std::invalid_argument("missing or non-string \"id\"");
            }
            rec.id = j["id"].get<std::string>();
            if (!j.contains("text") || !j["text"].is_string()) {
                throw std::invalid_argument("missing or non-string \"text\"");
            }
            rec.text = j["text"].get<std::string>();
            if (!j.contains("dimension") || !j["dimension"].is_string()) {
                throw std::invalid_argument("missing or non-string \"dimension\"");
            }
            rec.dimension = parse_dimension(j["dimension"].get<std::string>());
            if (!j.contains("label") || !j["label"].is_number_integer()) {
                throw std::invalid_argument("missing or non-integer \"label\"");
            }
            const int64_t label = j["label"].get<int64_t>();
            if (label != 0 && label != 1) {
                throw std::invalid_argument("label must be 0 or 1, got " +
                                            std::to_string(label));
            }
            rec.label = label == 1 ? SatisfactionLabel::Satisfied
                                   : SatisfactionLabel::Unsatisfied;
            if (j.contains("meta") && !j["meta"].is_null()) {
                if (!j["meta"].is_object()) {
                    throw std::invalid_argument("\"meta\" must be an object");
                }
                for (const auto& [k, v] : j["meta"].items()) {
                    if (!v.is_string()) {
                        throw std::invalid_argument("meta value for \"" + k +
                                                    "\" must be a string");
                    }
                    rec.meta.emplace(k, v.get<std::string>());
                }
            }
        } catch (const std::invalid_argument& e) {
            fail_at(path, line_no, e.what());
        }

        if (is_blank(rec.text)) fail_at(path, line_no, "blank text in record \"" + rec.id + "\"");
        if (!seen_ids.insert(rec.id).second) {
            fail_at(path, line_no, "duplicate id \"" + rec.id + "\"");
        }
        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

void save_corpus(const Corpus& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write corpus file " + path.string());
    }
    for (const SurveyRecord& r : c.records) {
        ordered_json j;
        j["id"] = r.id;
        j["text"] = r.text;
        j["dimension"] = to_string(r.dimension);
        j["label"] = static_cast<int>(r.label);
        if (!r.meta.empty()) j["meta"] = r.meta;
        out << j.dump() << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for corpus file " + path.string());
    }
}

std::pair<Corpus, Corpus> split_stratified(const Corpus& c, double test_fraction,
                                           uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("test_fraction must lie in (0,1), got " +
                                    std::to_string(test_fraction));
    }

    // stratum key -> original record indices, in corpus order
    std::map<std::pair<int, int>, std::vector<size_t>> strata;
    for (size_t i = 0; i < c.records.size(); ++i) {
        const SurveyRecord& r = c.records[i];
        strata[{static_cast<int>(r.dimension), static_cast<int>(r.label)}].push_back(i);
    }

    std::vector<bool> in_test(c.records.size(), false);
    for (const auto& [key, indices] : strata) {
        const auto dim = static_cast<HoneycombDimension>(key.first);
        const auto label = static_cast<SatisfactionLabel>(key.second);
        if (indices.size() < 2) {
            throw std::invalid_argument(
                "stratum " + std::string(to_string(dim)) + "/" +
                std::string(to_string(label)) + " has " + std::to_string(indices.size()) +
                " record(s); need at least 2");
        }
        const auto n = indices.size();
        auto n_test = static_cast<size_t>(std::lround(test_fraction * static_cast<double>(n)));
        n_test = std::clamp<size_t>(n_test, 1, n - 1);

        rng::Stream stream(rng::derive(seed, "split", dimension_key(dim),
                                       to_string(label)));
        std::vector<size_t> shuffled = indices;
        stream.shuffle(shuffled);
        for (size_t i = 0; i < n_test; ++i) in_test[shuffled[i]] = true;
    }

    Corpus train, test;
    for (size_t i = 0; i < c.records.size(); ++i) {
        (in_test[i] ? test : train).records.push_back(c.records[i]);
    }
    return {std::move(train), std::move(test)};
}

const std::vector<std::string>& positive_keyword_pool() {
    static const std::vector<std::string> pool = {
        "friendly", "cultural", "helpful", "convenient", "intuitive", "supportive",
    };
    return pool;
}

const std::vector<std::string>& negative_keyword_pool() {
    static const std::vector<std::string> pool = {
        "interface", "platform", "stark", "skeptical", "confusing", "cluttered",
    };
    return pool;
}

const std::vector<std::string>& filler_pool() {
    static const std::vector<std::string> pool = {
        "guangdong", "wechat",  "province", "health", "service", "doctor",
        "online",    "booking", "the",      "with",   "using",   "for",
    };
    return pool;
}

Corpus generate_synthetic(uint64_t seed, size_t n_per_dimension) {
    if (n_per_dimension < 2) {
        throw std::invalid_argument("n_per_dimension must be >= 2, got " +
                                    std::to_string(n_per_dimension));
    }

    const auto& fillers = filler_pool();
    Corpus corpus;
    corpus.records.reserve(kAllDimensions.size() * n_per_dimension);

    for (HoneycombDimension dim : kAllDimensions) {
        const std::string key = dimension_key(dim);
        for (size_t i = 0; i < n_per_dimension; ++i) {
            const bool satisfied = i % 2 == 0;
            rng::Stream stream(rng::derive(seed, "synthetic", key, std::to_string(i)));

            std::vector<std::string> tokens;
            const size_t n_fillers = 5 + stream.index(5); // 5..9
            for (size_t t = 0; t < n_fillers; ++t) {
                tokens.push_back(fillers[stream.index(fillers.size())]);
            }
            // keep "guangdong"/"wechat" frequent in both classes
            tokens.push_back(stream.index(2) == 0 ? "guangdong" : "wechat");

            // Label = majority of planted keywords. Class keywords always
            // outnumber the occasional opposite-class keyword, so the label
            // stays a deterministic function of what was planted while both
            // keyword kinds occur in both classes.
            const auto& pool = satisfied ? positive_keyword_pool() : negative_keyword_pool();
            const auto& opposite = satisfied ? negative_keyword_pool() : positive_keyword_pool();
            const size_t n_keywords = 1 + stream.index(3); // 1..3, distinct
            const auto insert_at_random = [&](const std::string& token) {
                tokens.insert(tokens.begin() + static_cast<long>(stream.index(tokens.size() + 1)),
                              token);
            };
            for (size_t k : stream.sample_indices(pool.size(), n_keywords)) {
                insert_at_random(pool[k]);
            }
            if (n_keywords >= 2 && stream.bernoulli(0.25)) {
                insert_at_random(opposite[stream.index(opposite.size())]);
            }

            std::string text;
            for (size_t t = 0; t < tokens.size(); ++t) {
                if (t > 0) text += ' ';
                text += tokens[t];
            }

            char id[64];
            std::snprintf(id, sizeof(id), "%s-%04zu", key.c_str(), i);
            corpus.records.push_back(SurveyRecord{
                .id = id,
                .text = std::move(text),
                .dimension = dim,
                .label = satisfied ? SatisfactionLabel::Satisfied
                                   : SatisfactionLabel::Unsatisfied,
                .meta = {},
            });
        }
    }
    return corpus;
}

} // namespace uxexplain
