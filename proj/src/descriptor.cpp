#include "qdb/descriptor.hpp"

#include <set>

#include <json.hpp>

namespace qdb {

namespace {

using nlohmann::json;

void check_fields(const json& j, const std::set<std::string>& allowed, const char* ctx) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw DescriptorError(std::string(ctx) + ": unknown field \"" + it.key() + "\"");
}

cd parse_complex(const json& j, const char* ctx) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw DescriptorError(std::string(ctx) + ": complex entries must be [re, im] pairs");
    return cd(j[0].get<double>(), j[1].get<double>());
}

Mat parse_matrix(const json& j, int rows, int cols, const char* ctx) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw DescriptorError(std::string(ctx) + ": expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw DescriptorError(std::string(ctx) + ": expected " + std::to_string(cols) +
                                  " columns");
        for (int c = 0; c < cols; ++c) m(r, c) = parse_complex(row[c], ctx);
    }
    return m;
}

double require_number(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number())
        throw DescriptorError(std::string("descriptor: missing or non-numeric field \"") +
                              field + "\"");
    return j[field].get<double>();
}

}  // namespace

ChannelDescriptor parse_channel_descriptor(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DescriptorError(std::string("descriptor: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DescriptorError("descriptor: top level must be an object");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw DescriptorError("descriptor: missing string field \"kind\"");
    std::string kind = j["kind"].get<std::string>();

    ChannelDescriptor out;
    out.kind = kind;

    if (kind == "kraus") {
        check_fields(j, {"kind", "dim_in", "dim_out", "kraus"}, "kraus descriptor");
        int din = static_cast<int>(require_number(j, "dim_in"));
        int dout = static_cast<int>(require_number(j, "dim_out"));
        if (din < 1 || dout < 1)
            throw DescriptorError("kraus descriptor: dims must be positive (field \"dim_in\"/\"dim_out\")");
        if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
            throw DescriptorError("kraus descriptor: field \"kraus\" must be a nonempty array");
        std::vector<Mat> ops;
        for (const json& jk : j["kraus"])
            ops.push_back(parse_matrix(jk, dout, din, "kraus descriptor (field \"kraus\")"));
        try {
            out.choi = choi_from_kraus(ops);
        } catch (const std::exception& e) {
            throw DescriptorError(std::string("kraus descriptor: ") + e.what());
        }
        return out;
    }

    if (kind == "gadc") {
        check_fields(j, {"kind", "param", "gamma", "N", "phi"}, "gadc descriptor");
        if (!j.contains("param") || !j["param"].is_string())
            throw DescriptorError("gadc descriptor: missing string field \"param\"");
        std::string param = j["param"].get<std::string>();
        double gamma = require_number(j, "gamma");
        double noise = require_number(j, "N");
        double phi = j.contains("phi") ? require_number(j, "phi") : 0.0;
        if (!(gamma > 0 && gamma < 1))
            throw DescriptorError("gadc descriptor: field \"gamma\" must lie in (0,1)");
        if (!(noise > 0 && noise < 1))
            throw DescriptorError("gadc descriptor: field \"N\" must lie in (0,1)");
        if (param == "loss") {
            out.family = gadc_loss_family(noise);
            out.theta = gamma;
        } else if (param == "noise") {
            out.family = gadc_noise_family(gamma);
            out.theta = noise;
        } else if (param == "phase") {
            out.family = gadc_phase_family(gamma, noise);
            out.theta = phi;
        } else {
            throw DescriptorError("gadc descriptor: field \"param\" must be loss|noise|phase");
        }
        out.choi = out.family->at(out.theta);
        return out;
    }

    if (kind == "choi") {
        check_fields(j, {"kind", "dims", "matrix"}, "choi descriptor");
        if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 2)
            throw DescriptorError("choi descriptor: field \"dims\" must be [dR, dB]");
        int dr = j["dims"][0].get<int>(), db = j["dims"][1].get<int>();
        if (dr < 1 || db < 1) throw DescriptorError("choi descriptor: dims must be positive");
        if (!j.contains("matrix"))
            throw DescriptorError("choi descriptor: missing field \"matrix\"");
        Mat m = parse_matrix(j["matrix"], dr * db, dr * db, "choi descriptor (field \"matrix\")");
        out.choi = Choi{m, dr, db};
        try {
            out.choi.validate();
        } catch (const std::exception& e) {
            throw DescriptorError(std::string("choi descriptor: ") + e.what());
        }
        return out;
    }

    throw DescriptorError("descriptor: field \"kind\" must be kraus|gadc|choi");
}

}  // namespace qdb
