// SPDX-License-Identifier: Apache-2.0
#include "uxexplain/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace uxexplain {

namespace {

template <typename T>
void sort_and_truncate(std::vector<T>& data, size_t top_n) {
    std::sort(data.begin(), data.end(), [](const T& a, const T& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.token < b.token;
    });
    if (data.size() > top_n) data.resize(top_n);
}

std::string format_number(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

nlohmann::ordered_json cloud_to_json(const std::vector<WordCloudDatum>& data) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const WordCloudDatum& d : data) {
        arr.push_back({{"token", d.token}, {"weight", d.weight},
                       {"class", std::string(to_string(d.tag))}});
    }
    return arr;
}

std::vector<WordCloudDatum> cloud_from_json(const nlohmann::json& arr) {
    std::vector<WordCloudDatum> data;
    for (const auto& d : arr) {
        data.push_back(WordCloudDatum{d.at("token").get<std::string>(),
                                      d.at("weight").get<double>(),
                                      parse_class_tag(d.at("class").get<std::string>())});
    }
    return data;
}

nlohmann::ordered_json sample_to_json(const SampleExplanation& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["p_sat"] = s.p_sat;
    j["lime"] = lime_to_json(s.lime, s.id);
    j["anchor"] = anchor_to_json(s.anchor, s.id);
    return j;
}

SampleExplanation sample_from_json(const nlohmann::json& j) {
    SampleExplanation s;
    s.id = j.at("id").get<std::string>();
    s.p_sat = j.at("p_sat").get<double>();
    s.lime = lime_from_json(j.at("lime"));
    s.anchor = anchor_from_json(j.at("anchor"));
    return s;
}

} // namespace

std::string_view to_string(ClassTag tag) {
    switch (tag) {
        case ClassTag::Satisfied: return "Satisfied";
        case ClassTag::Unsatisfied: return "Unsatisfied";
        case ClassTag::Both: return "Both";
    }
    return "Both";
}

ClassTag parse_class_tag(std::string_view s) {
    if (s == "Satisfied") return ClassTag::Satisfied;
    if (s == "Unsatisfied") return ClassTag::Unsatisfied;
    if (s == "Both") return ClassTag::Both;
    throw std::invalid_argument("unknown class tag \"" + std::string(s) + "\"");
}

std::vector<WordCloudDatum> word_cloud_frequency(const Corpus& corpus,
                                                 HoneycombDimension dimension,
                                                 size_t top_n) {
    if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");

    struct Entry {
        size_t df = 0;
        bool in_satisfied = false;
        bool in_unsatisfied = false;
    };
    std::map<std::string, Entry> counts;
    for (const SurveyRecord& r : corpus.records) {
        if (r.dimension != dimension) continue;
        std::set<std::string> distinct;
        for (std::string& t : tokenize(r.text)) distinct.insert(std::move(t));
        for (const std::string& t : distinct) {
            Entry& e = counts[t];
            e.df += 1;
            (r.label == SatisfactionLabel::Satisfied ? e.in_satisfied
                                                     : e.in_unsatisfied) = true;
        }
    }

    std::vector<WordCloudDatum> data;
    data.reserve(counts.size());
    for (const auto& [token, e] : counts) {
        ClassTag tag = ClassTag::Both;
        if (e.in_satisfied && !e.in_unsatisfied) tag = ClassTag::Satisfied;
        if (!e.in_satisfied && e.in_unsatisfied) tag = ClassTag::Unsatisfied;
        data.push_back(WordCloudDatum{token, static_cast<double>(e.df), tag});
    }
    sort_and_truncate(data, top_n);
    return data;
}

std::vector<WordCloudDatum> word_cloud_shap(const std::vector<ShapExplanation>& explanations,
                                            size_t top_n) {
    if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");

    const GlobalShapSummary summary = aggregate_global(explanations);
    std::vector<WordCloudDatum> data;
    data.reserve(summary.tokens.size());
    for (const TokenShapStats& s : summary.tokens) {
        ClassTag tag = ClassTag::Both;
        if (s.mean_phi > 1e-12) tag = ClassTag::Satisfied;
        if (s.mean_phi < -1e-12) tag = ClassTag::Unsatisfied;
        data.push_back(WordCloudDatum{s.token, s.mean_abs_phi, tag});
    }
    sort_and_truncate(data, top_n);
    return data;
}

std::vector<std::pair<double, double>> shap_distribution(
    std::string_view token, const std::vector<ShapExplanation>& explanations) {
    std::vector<std::pair<double, double>> pairs;
    for (const ShapExplanation& exp : explanations) {
        for (const auto& [t, phi] : exp.phis) {
            if (t == token) {
                pairs.emplace_back(phi, exp.fx);
                break;
            }
        }
    }
    return pairs;
}

nlohmann::ordered_json report_to_json(const DimensionReport& report) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["dimension"] = to_string(report.dimension);
    j["metrics"] = report.metrics.to_json();

    nlohmann::ordered_json keywords = nlohmann::ordered_json::array();
    for (const TokenShapStats& s : report.keywords) {
        keywords.push_back({{"token", s.token},
                            {"mean_abs_phi", s.mean_abs_phi},
                            {"mean_phi", s.mean_phi},
                            {"count", s.count}});
    }
    j["keywords"] = std::move(keywords);

    j["word_cloud"] = {{"frequency", cloud_to_json(report.cloud_frequency)},
                       {"shap", cloud_to_json(report.cloud_shap)}};

    nlohmann::ordered_json dists = nlohmann::ordered_json::object();
    for (const auto& [token, pairs] : report.distributions) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [phi, fx] : pairs) {
            arr.push_back(nlohmann::ordered_json::array({phi, fx}));
        }
        dists[token] = std::move(arr);
    }
    j["distributions"] = std::move(dists);

    nlohmann::ordered_json samples = nlohmann::ordered_json::object();
    samples["positive"] = report.sample_positive
                              ? sample_to_json(*report.sample_positive)
                              : nlohmann::ordered_json(nullptr);
    samples["negative"] = report.sample_negative
                              ? sample_to_json(*report.sample_negative)
                              : nlohmann::ordered_json(nullptr);
    j["samples"] = std::move(samples);
    return j;
}

DimensionReport report_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != 1) {
        throw std::invalid_argument("unsupported report version");
    }
    DimensionReport report;
    report.dimension = parse_dimension(j.at("dimension").get<std::string>());
    report.metrics = EvalMetrics::from_json(j.at("metrics"));

    for (const auto& k : j.at("keywords")) {
        TokenShapStats s;
        s.token = k.at("token").get<std::string>();
        s.mean_abs_phi = k.at("mean_abs_phi").get<double>();
        s.mean_phi = k.at("mean_phi").get<double>();
        s.count = k.at("count").get<size_t>();
        report.keywords.push_back(std::move(s));
    }

    report.cloud_frequency = cloud_from_json(j.at("word_cloud").at("frequency"));
    report.cloud_shap = cloud_from_json(j.at("word_cloud").at("shap"));

    for (const auto& [token, arr] : j.at("distributions").items()) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& pair : arr) {
            pairs.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
        report.distributions[token] = std::move(pairs);
    }

    if (!j.at("samples").at("positive").is_null()) {
        report.sample_positive = sample_from_json(j.at("samples").at("positive"));
    }
    if (!j.at("samples").at("negative").is_null()) {
        report.sample_negative = sample_from_json(j.at("samples").at("negative"));
    }
    return report;
}

std::string word_cloud_svg(const std::vector<WordCloudDatum>& data) {
    constexpr double kMinFont = 12.0;
    constexpr double kMaxFont = 48.0;
    constexpr size_t kColumns = 4;
    constexpr double kCellWidth = 240.0;
    constexpr double kCellHeight = 60.0;

    double w_min = 0.0, w_max = 0.0;
    if (!data.empty()) {
        w_min = w_max = data[0].weight;
        for (const WordCloudDatum& d : data) {
            w_min = std::min(w_min, d.weight);
            w_max = std::max(w_max, d.weight);
        }
    }

    const size_t rows = data.empty() ? 0 : (data.size() + kColumns - 1) / kColumns;
    const double width = kColumns * kCellWidth;
    const double height = std::max(kCellHeight, rows * kCellHeight) + 16.0;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           format_number(width, 0) + "\" height=\"" + format_number(height, 0) + "\">\n";
    for (size_t i = 0; i < data.size(); ++i) {
        const WordCloudDatum& d = data[i];
        const double scale =
            w_max > w_min ? (d.weight - w_min) / (w_max - w_min) : 1.0;
        const double font = kMinFont + (kMaxFont - kMinFont) * scale;
        const double x = static_cast<double>(i % kColumns) * kCellWidth + 16.0;
        const double y = static_cast<double>(i / kColumns) * kCellHeight + 48.0;
        const char* fill = d.tag == ClassTag::Satisfied     ? "#2a7d2a"
                           : d.tag == ClassTag::Unsatisfied ? "#b03030"
                                                            : "#555555";
        svg += "  <text x=\"" + format_number(x, 1) + "\" y=\"" + format_number(y, 1) +
               "\" font-size=\"" + format_number(font, 1) + "\" fill=\"" + fill +
               "\">" + escape_xml(d.token) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::filesystem::path> render_report(const DimensionReport& report,
                                                 const std::filesystem::path& out_dir,
                                                 RenderFormats formats) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + out_dir.string() +
                                 ": " + ec.message());
    }

    const std::string key = dimension_key(report.dimension);
    std::vector<std::filesystem::path> written;

    const auto write_file = [&](const std::filesystem::path& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << body;
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    };

    if (formats.json) {
        write_file(out_dir / (key + ".report.json"), report_to_json(report).dump(2) + "\n");
    }
    if (formats.svg) {
        if (!report.cloud_frequency.empty()) {
            write_file(out_dir / (key + ".cloud_frequency.svg"),
                       word_cloud_svg(report.cloud_frequency));
        }
        if (!report.cloud_shap.empty()) {
            write_file(out_dir / (key + ".cloud_shap.svg"),
                       word_cloud_svg(report.cloud_shap));
        }
    }
    return written;
}

} // namespace uxexplain
