#include "rnn_surgery/network_json.hpp"

#include <cmath>
#include <fstream>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw FormatError(what + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw FormatError(what + ": non-finite value");
    return v;
}

Matrix matrix_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw FormatError(what + ": rows must be non-empty arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw FormatError(what + ": ragged matrix");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = number(row[static_cast<std::size_t>(k)], what);
    }
    return m;
}

Vector vector_from(const json& j, const std::string& what) {
    if (!j.is_array()) throw FormatError(what + ": expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
    return v;
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

template <class Net>
json recurrent_json(const Net& net, const std::vector<ActivationMask>* masks) {
    json layers = json::array();
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        json layer{{"A", matrix_json(net.layers[l].A)},
                   {"B", matrix_json(net.layers[l].B)},
                   {"c", vector_json(net.layers[l].c)}};
        if (masks) {
            json mask = json::array();
            for (bool b : (*masks)[l].active) mask.push_back(b ? 1 : 0);
            layer["mask"] = std::move(mask);
        }
        layers.push_back(std::move(layer));
    }
    json j{{"dims",
            {{"d_x", net.input_dim()},
             {"d_y", net.output_dim()},
             {"W", net.width()},
             {"L", net.depth()}}},
           {"embed", matrix_json(net.P)},
           {"layers", std::move(layers)},
           {"project", matrix_json(net.Q)}};
    if (net.output_clip) j["output_clip"] = *net.output_clip;
    return j;
}

void read_recurrent(const json& j, Matrix& P, std::vector<RecurrentLayer>& layers, Matrix& Q,
                    std::optional<double>& clip, std::vector<ActivationMask>* masks) {
    P = matrix_from(field(j, "embed", "network"), "embed");
    Q = matrix_from(field(j, "project", "network"), "project");
    const json& ls = field(j, "layers", "network");
    if (!ls.is_array()) throw FormatError("layers: expected an array");
    for (std::size_t l = 0; l < ls.size(); ++l) {
        const std::string where = "layers[" + std::to_string(l) + "]";
        layers.push_back({matrix_from(field(ls[l], "A", where), where + ".A"),
                          matrix_from(field(ls[l], "B", where), where + ".B"),
                          vector_from(field(ls[l], "c", where), where + ".c")});
        if (masks) {
            ActivationMask m;
            if (ls[l].contains("mask")) {
                for (const auto& b : ls[l].at("mask")) {
                    if (!b.is_number_integer() && !b.is_boolean())
                        throw FormatError(where + ".mask: entries must be 0/1");
                    m.active.push_back(b.is_boolean() ? b.get<bool>() : b.get<int>() != 0);
                }
            } else {
                m = ActivationMask::full(P.rows());
            }
            masks->push_back(std::move(m));
        }
    }
    if (j.contains("output_clip") && !j.at("output_clip").is_null())
        clip = number(j.at("output_clip"), "output_clip");
}

}  // namespace

std::string network_kind(const AnyNetwork& net) {
    switch (net.index()) {
        case 0: return "fnn";
        case 1: return "rnn";
        default: return "mrnn";
    }
}

json network_to_json(const AnyNetwork& net, std::optional<long> seq_len) {
    json j;
    if (const auto* f = std::get_if<FeedforwardNet>(&net)) {
        json layers = json::array();
        for (const auto& layer : f->layers)
            layers.push_back({{"weight", matrix_json(layer.weight)}, {"bias", vector_json(layer.bias)}});
        j = {{"dims",
              {{"d_x", f->input_dim()},
               {"d_y", f->output_dim()},
               {"W", f->width()},
               {"L", f->depth()}}},
             {"layers", std::move(layers)}};
    } else if (const auto* r = std::get_if<RecurrentNet>(&net)) {
        j = recurrent_json(*r, nullptr);
    } else {
        const auto& m = std::get<ModifiedRecurrentNet>(net);
        j = recurrent_json(m, &m.masks);
    }
    j["kind"] = network_kind(net);
    if (seq_len) j["dims"]["N"] = *seq_len;
    return j;
}

std::optional<long> network_seq_len(const json& j) {
    if (j.is_object() && j.contains("dims") && j["dims"].contains("N") && j["dims"]["N"].is_number_integer())
        return j["dims"]["N"].get<long>();
    return std::nullopt;
}

AnyNetwork network_from_json(const json& j) {
    const json& kind = field(j, "kind", "network");
    if (!kind.is_string()) throw FormatError("kind must be a string");
    const std::string k = kind.get<std::string>();
    try {
        if (k == "fnn") {
            FeedforwardNet f;
            const json& ls = field(j, "layers", "network");
            if (!ls.is_array()) throw FormatError("layers: expected an array");
            for (std::size_t l = 0; l < ls.size(); ++l) {
                const std::string where = "layers[" + std::to_string(l) + "]";
                f.layers.push_back({matrix_from(field(ls[l], "weight", where), where + ".weight"),
                                    vector_from(field(ls[l], "bias", where), where + ".bias")});
            }
            f.validate();
            return f;
        }
        if (k == "rnn") {
            RecurrentNet r;
            read_recurrent(j, r.P, r.layers, r.Q, r.output_clip, nullptr);
            r.validate();
            return r;
        }
        if (k == "mrnn") {
            ModifiedRecurrentNet m;
            read_recurrent(j, m.P, m.layers, m.Q, m.output_clip, &m.masks);
            m.validate();
            return m;
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed network: ") + e.what());
    } catch (const DimensionError& e) {
        throw FormatError(std::string("inconsistent network shapes: ") + e.what());
    }
    throw FormatError("unknown network kind \"" + k + "\"");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

AnyNetwork read_network(const std::filesystem::path& path) {
    return network_from_json(read_json_file(path));
}

void write_network(const std::filesystem::path& path, const AnyNetwork& net, std::optional<long> seq_len) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << network_to_json(net, seq_len).dump(1) << '\n';
}

}  // namespace rnn_surgery
