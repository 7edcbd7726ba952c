#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rnn_surgery/errors.hpp"
#include "rnn_surgery/network_json.hpp"

using namespace rnn_surgery;

TEST_CASE("network JSON round trip is bit-exact") {
    std::mt19937_64 rng(3);
    auto rnn = oracle::random_rnn(rng, 2, 3, 2, 1);
    rnn.output_clip = 0.1 + 1.0 / 3.0;
    const auto back = std::get<RecurrentNet>(network_from_json(network_to_json(rnn, 5)));
    CHECK(back.P == rnn.P);
    CHECK(back.Q == rnn.Q);
    CHECK(back.output_clip == rnn.output_clip);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(back.layers[l].A == rnn.layers[l].A);
        CHECK(back.layers[l].B == rnn.layers[l].B);
        CHECK(back.layers[l].c == rnn.layers[l].c);
    }

    auto mrnn = ModifiedRecurrentNet::from_rnn(rnn);
    mrnn.masks[0] = ActivationMask{{false, true, false}};
    const auto jm = network_to_json(mrnn);
    CHECK(jm["kind"] == "mrnn");
    CHECK(std::get<ModifiedRecurrentNet>(network_from_json(jm)).masks == mrnn.masks);

    const auto fnn = oracle::random_fnn(rng, {3, 4, 1});
    const auto jf = network_to_json(fnn, 7);
    CHECK(network_seq_len(jf) == 7);
    const auto fb = std::get<FeedforwardNet>(network_from_json(jf));
    CHECK(fb.layers[0].weight == fnn.layers[0].weight);
    CHECK(fb.layers[1].bias == fnn.layers[1].bias);
}

TEST_CASE("network JSON file round trip") {
    std::mt19937_64 rng(4);
    const auto rnn = oracle::random_rnn(rng, 1, 2, 1, 1);
    const auto path = std::filesystem::temp_directory_path() / "rnn_surgery_json_test.json";
    write_network(path, rnn);
    CHECK(network_kind(read_network(path)) == "rnn");
    std::filesystem::remove(path);
}

TEST_CASE("malformed JSON is a format error") {
    CHECK_THROWS_AS(network_from_json(nlohmann::json::parse(R"({"kind":"cnn"})")), FormatError);
    CHECK_THROWS_AS(network_from_json(nlohmann::json::parse(R"({"kind":"fnn","layers":[{"weight":[[1,2],[3]],"bias":[0,0]}]})")),
                    FormatError);
    CHECK_THROWS_AS(network_from_json(nlohmann::json::parse(R"({"kind":"fnn","layers":[{"weight":[[1,2]],"bias":[0,0]}]})")),
                    FormatError);
    CHECK_THROWS_AS(read_network("/nonexistent/net.json"), FormatError);
}
