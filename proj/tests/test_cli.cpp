/*
 * Copyright 2026 The hmera Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <sys/wait.h>

#include "hmera/cascade.hpp"

namespace {

struct Output {
    int status = -1;
    std::string text;
    std::vector<std::vector<std::string>> rows;  // header first
    nlohmann::json footer;
};

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "hmera_cli_" + name; }

Output run(const std::string& args, const std::string& tag) {
    const std::string path = temp_path(tag + ".out");
    const std::string cmd = std::string(HMERA_CLI_PATH) + " " + args + " --out " + path + " > /dev/null 2>&1";
    Output o;
    const int raw = std::system(cmd.c_str());
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    o.text = ss.str();
    std::istringstream lines(o.text);
    std::string line, foot;
    bool in_footer = false;
    while (std::getline(lines, line)) {
        if (line == "# ---") {
            in_footer = true;
            continue;
        }
        if (in_footer) {
            foot += line.substr(2) + "\n";
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream cs(line);
        std::string cell;
        while (std::getline(cs, cell, ',')) cells.push_back(cell);
        o.rows.push_back(cells);
    }
    if (!foot.empty()) o.footer = nlohmann::json::parse(foot);
    std::remove(path.c_str());
    return o;
}

int column(const Output& o, const std::string& name) {
    for (std::size_t i = 0; i < o.rows.at(0).size(); ++i)
        if (o.rows[0][i] == name) return static_cast<int>(i);
    ADD_FAILURE() << "missing column " << name;
    return 0;
}

double cell(const Output& o, std::size_t row, const std::string& name) { return std::stod(o.rows.at(row + 1).at(static_cast<std::size_t>(column(o, name)))); }

}  // namespace

TEST(Cli, DesignRejectsInvalidOrder) {
    EXPECT_NE(run("design --K 0 --L 1", "bad").status, 0);
}

TEST(Cli, DesignWritesLengthFourPair) {
    const Output o = run("design --K 1 --L 1", "k1");
    ASSERT_EQ(o.status, 0);
    const auto j = nlohmann::json::parse(o.text);
    EXPECT_EQ(j["g_s"].size(), 4u);
    EXPECT_EQ(j["h_s"].size(), 4u);
}

TEST(Cli, DesignEpsilonForThirdOrder) {
    const Output o = run("design --K 3 --L 3", "k3");
    ASSERT_EQ(o.status, 0);
    EXPECT_NEAR(nlohmann::json::parse(o.text)["epsilon"].get<double>(), 0.018338, 1e-6);
}

TEST(Cli, CertifyHaarFromFile) {
    const std::string pair_file = temp_path("haar.json");
    hmera::save_pair(hmera::haar_pair(), pair_file);
    const Output o = run("certify --pair " + pair_file, "haar");
    std::remove(pair_file.c_str());
    ASSERT_EQ(o.status, 0);
    EXPECT_NEAR(nlohmann::json::parse(o.text)["C_IR"].get<double>(), 1.0, 1e-6);
}

TEST(Cli, CertifyTableRows) {
    const Output a = run("certify --K 4 --L 4", "c4");
    ASSERT_EQ(a.status, 0);
    EXPECT_NEAR(nlohmann::json::parse(a.text)["C_UV"].get<double>() / 0.626782, 1.0, 0.05);
    const Output b = run("certify --K 9 --L 9", "c9");
    EXPECT_NEAR(nlohmann::json::parse(b.text)["epsilon"].get<double>(), 0.000009, 5e-6);
}

TEST(Cli, Corr2ptWithinBound) {
    const Output k3 = run("corr2pt --K 3 --L 3", "corr3");
    ASSERT_EQ(k3.status, 0);
    const Output k1 = run("corr2pt --K 1 --L 1", "corr1");
    ASSERT_EQ(k1.status, 0);
    const std::size_t n = k3.rows.size() - 1;
    ASSERT_EQ(n, k1.rows.size() - 1);
    std::size_t better = 0;
    for (std::size_t r = 0; r < n; ++r) {
        EXPECT_LE(cell(k3, r, "abs_err"), cell(k3, r, "thm_bound"));
        if (cell(k3, r, "x") == cell(k3, r, "y")) EXPECT_LE(std::abs(cell(k3, r, "im_mera")), 1e-10);
        better += cell(k3, r, "abs_err") < cell(k1, r, "abs_err");
    }
    EXPECT_GE(static_cast<double>(better), 0.9 * static_cast<double>(n));
}

TEST(Cli, Stress2ptSlopeAndOnePoint) {
    const Output o = run("stress2pt --K 3 --L 3", "stress");
    ASSERT_EQ(o.status, 0);
    EXPECT_NEAR(o.footer["fit"]["slope_mera"].get<double>(), -4.0, 0.2);
    EXPECT_LE(o.footer["one_point"].get<double>(), 1e-10);
    for (std::size_t r = 0; r + 1 < o.rows.size(); ++r)
        EXPECT_LE(cell(o, r, "rel_err"), 0.10) << "separation " << cell(o, r, "separation");
}

TEST(Cli, EntropyCentralCharge) {
    const Output k3 = run("entropy --K 3 --L 3", "ent3");
    ASSERT_EQ(k3.status, 0);
    const double c3 = k3.footer["cardy"]["c"].get<double>();
    EXPECT_NEAR(c3, 1.0, 0.05);
    const Output k1 = run("entropy --K 1 --L 1", "ent1");
    const double c1 = k1.footer["cardy"]["c"].get<double>();
    EXPECT_GT(std::abs(c1 - 1.0), std::abs(c3 - 1.0));
}

TEST(Cli, BoundCurves) {
    const Output o = run("bound --K 2 --L 2 --layer-range 1 30", "bound");
    ASSERT_EQ(o.status, 0);
    const std::size_t n = o.rows.size() - 1;
    ASSERT_EQ(n, 30u);
    for (std::size_t r = 1; r < n; ++r) EXPECT_LE(cell(o, r, "bound"), cell(o, r - 1, "bound"));
    EXPECT_LE(cell(o, n - 1, "bound"), cell(o, 0, "bound"));
    const Output m1 = run("bound --K 2 --L 2 --m 1 --layer-range 1 30", "bound_m1");
    for (std::size_t r = 0; r < n; ++r) EXPECT_NEAR(cell(m1, r, "bound") / cell(o, r, "bound"), 8.0 * 3.0 / 2.0, 1e-9);
}

TEST(Cli, BoundPlateausOrderedByEpsilon) {
    const Output o = run("bound --table --n 2 --m 0 --D 1.4142135623730951 --layer-range 1 40", "table");
    ASSERT_EQ(o.status, 0);
    std::vector<std::pair<double, double>> eps_plateau;
    int lastK = -1;
    for (std::size_t r = 0; r + 1 < o.rows.size(); ++r) {
        const int K = static_cast<int>(cell(o, r, "K"));
        if (K == lastK) continue;
        lastK = K;
        const auto row = hmera::reference_row(K, K);
        ASSERT_TRUE(row.has_value());
        eps_plateau.emplace_back(row->epsilon, cell(o, r, "plateau"));
    }
    ASSERT_GE(eps_plateau.size(), 2u);
    std::sort(eps_plateau.begin(), eps_plateau.end());
    for (std::size_t i = 1; i < eps_plateau.size(); ++i) EXPECT_GE(eps_plateau[i].second, eps_plateau[i - 1].second);
}

TEST(Cli, ExportCircuit) {
    const Output o = run("export-circuit --K 2 --L 2 --layers 4", "circ");
    ASSERT_EQ(o.status, 0);
    const auto j = nlohmann::json::parse(o.text);
    ASSERT_EQ(j["layers"].size(), 4u);
    for (const auto& layer : j["layers"]) EXPECT_EQ(layer["sublayers"].size() + (layer["hadamard"].get<bool>() ? 1u : 0u), 5u);
    for (int K = 1; K <= 4; ++K) {
        const auto jk = nlohmann::json::parse(run("export-circuit --K " + std::to_string(K) + " --L " + std::to_string(K) + " --layers 2", "circ_k").text);
        EXPECT_LE(jk["reassembly_defect"].get<double>(), 1e-10);
    }
}

TEST(Cli, ExportHaarCircuit) {
    const std::string pair_file = temp_path("haar_c.json");
    hmera::save_pair(hmera::haar_pair(), pair_file);
    const Output o = run("export-circuit --pair " + pair_file + " --layers 3", "haar_circ");
    std::remove(pair_file.c_str());
    ASSERT_EQ(o.status, 0);
    for (const auto& layer : nlohmann::json::parse(o.text)["layers"]) {
        EXPECT_EQ(layer["sublayers"].size(), 1u);
        EXPECT_TRUE(layer["hadamard"].get<bool>());
    }
}

TEST(Cli, DeterministicReruns) {
    for (const std::string args : {"design --K 2 --L 2", "bound --K 3 --L 3 --layer-range 1 10", "export-circuit --K 2 --L 1 --layers 2"}) {
        const Output a = run(args, "det_a"), b = run(args, "det_b");
        EXPECT_EQ(a.text, b.text) << args;
    }
}
