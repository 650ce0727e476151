#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "bcred/config.hpp"
#include "bcred/experiment.hpp"
#include "bcred/io.hpp"
#include "bcred/prng.hpp"

using namespace bcred;

namespace {

std::string temp_path(const std::string& name) { return testing::TempDir() + name; }

void write_raw(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TEST(MatrixFile, RoundTripIsExact) {
    MatrixFileData m;
    m.rows = 3;
    m.cols = 2;
    m.entries = {1.5, -2.25, 0.0, 1e-308, std::numeric_limits<double>::max(), -7.0};
    const std::string path = temp_path("roundtrip.bmat");
    write_matrix_file(path, m);

    const MatrixFileData back = read_matrix_file(path);
    EXPECT_EQ(back.rows, 3u);
    EXPECT_EQ(back.cols, 2u);
    EXPECT_EQ(back.entries, m.entries);
}

TEST(MatrixFile, RejectsBadInput) {
    MatrixFileData m;
    m.rows = 2;
    m.cols = 2;
    m.entries = {1.0, 2.0, 3.0};
    EXPECT_THROW(write_matrix_file(temp_path("short.bmat"), m), std::invalid_argument);

    EXPECT_THROW(read_matrix_file(temp_path("does-not-exist.bmat")), std::runtime_error);

    const std::string magic = temp_path("magic.bmat");
    write_raw(magic, "MATX\x01\x00\x00\x00\x01\x00\x00\x00");
    EXPECT_THROW(read_matrix_file(magic), std::runtime_error);

    const std::string header = temp_path("header.bmat");
    write_raw(header, "BMAT\x02\x00");
    EXPECT_THROW(read_matrix_file(header), std::runtime_error);

    const std::string data = temp_path("data.bmat");
    std::string bytes = "BMAT";
    bytes += std::string("\x02\x00\x00\x00", 4);
    bytes += std::string("\x02\x00\x00\x00", 4);
    bytes += std::string(8, '\0'); // one entry instead of four
    write_raw(data, bytes);
    EXPECT_THROW(read_matrix_file(data), std::runtime_error);
}

TEST(MaskFile, RoundTripAndErrors) {
    FrequencyMask mask;
    mask.height = 3;
    mask.width = 4;
    mask.selected = {true, false, false, true, false, true, true, false, true, true, false, false};
    const std::string path = temp_path("mask.txt");
    write_mask_file(path, mask);

    const FrequencyMask back = read_mask_file(path);
    EXPECT_EQ(back.height, mask.height);
    EXPECT_EQ(back.width, mask.width);
    EXPECT_EQ(back.selected, mask.selected);
    EXPECT_EQ(back.count(), 6u);

    const std::string bad_header = temp_path("mask-header.txt");
    write_raw(bad_header, "0 4\n0000\n");
    EXPECT_THROW(read_mask_file(bad_header), std::runtime_error);

    const std::string truncated = temp_path("mask-truncated.txt");
    write_raw(truncated, "2 4\n1010\n");
    EXPECT_THROW(read_mask_file(truncated), std::runtime_error);

    const std::string short_row = temp_path("mask-short-row.txt");
    write_raw(short_row, "2 4\n1010\n10\n");
    EXPECT_THROW(read_mask_file(short_row), std::runtime_error);

    const std::string bad_char = temp_path("mask-char.txt");
    write_raw(bad_char, "1 4\n10x0\n");
    EXPECT_THROW(read_mask_file(bad_char), std::runtime_error);

    EXPECT_THROW(read_mask_file(temp_path("missing-mask.txt")), std::runtime_error);
}

TEST(PgmFile, ReadsAsciiWithCommentsAndScales) {
    const std::string path = temp_path("ascii.pgm");
    write_raw(path, "P2\n# synthetic checker\n2 2\n255\n0 255 255 0\n");
    const Image img = read_pgm(path);
    EXPECT_EQ(img.width, 2u);
    EXPECT_EQ(img.height, 2u);
    EXPECT_EQ(img.pixels, (std::vector<double>{0.0, 1.0, 1.0, 0.0}));
}

TEST(PgmFile, ReadsTwoByteBinarySamples) {
    const std::string path = temp_path("wide.pgm");
    std::string bytes = "P5\n2 1\n65535\n";
    const unsigned char raw[] = {0x01, 0x00, 0xFF, 0xFF};
    bytes.append(reinterpret_cast<const char*>(raw), 4);
    write_raw(path, bytes);
    const Image img = read_pgm(path);
    EXPECT_EQ(img.pixels.size(), 2u);
    EXPECT_DOUBLE_EQ(img.pixels[0], 256.0 / 65535.0);
    EXPECT_DOUBLE_EQ(img.pixels[1], 1.0);
}

TEST(PgmFile, RoundTripWithinHalfQuantum) {
    SplitMix64 rng(71);
    Image img;
    img.height = 5;
    img.width = 7;
    img.pixels.resize(35);
    for (double& p : img.pixels) p = rng.uniform01();
    img.pixels[0] = -0.4; // clamped to 0
    img.pixels[1] = 1.7;  // clamped to 1

    const std::string path = temp_path("roundtrip.pgm");
    write_pgm(path, img);
    const Image back = read_pgm(path);
    ASSERT_EQ(back.pixels.size(), img.pixels.size());
    EXPECT_EQ(back.pixels[0], 0.0);
    EXPECT_EQ(back.pixels[1], 1.0);
    for (std::size_t i = 2; i < img.pixels.size(); ++i)
        EXPECT_NEAR(back.pixels[i], img.pixels[i], 1.0 / 510.0 + 1e-12);
}

TEST(PgmFile, RejectsMalformedContent) {
    const std::string bad_magic = temp_path("magic.pgm");
    write_raw(bad_magic, "P3\n1 1\n255\n0 0 0\n");
    EXPECT_THROW(read_pgm(bad_magic), std::runtime_error);

    const std::string zero_maxval = temp_path("maxval.pgm");
    write_raw(zero_maxval, "P2\n1 1\n0\n0\n");
    EXPECT_THROW(read_pgm(zero_maxval), std::runtime_error);

    const std::string huge_maxval = temp_path("maxval-huge.pgm");
    write_raw(huge_maxval, "P2\n1 1\n70000\n0\n");
    EXPECT_THROW(read_pgm(huge_maxval), std::runtime_error);

    const std::string over = temp_path("over.pgm");
    write_raw(over, "P2\n1 1\n255\n300\n");
    EXPECT_THROW(read_pgm(over), std::runtime_error);

    const std::string truncated = temp_path("truncated.pgm");
    std::string bytes = "P5\n2 2\n255\n";
    bytes += '\x10';
    bytes += '\x20'; // two samples where four are promised
    write_raw(truncated, bytes);
    EXPECT_THROW(read_pgm(truncated), std::runtime_error);

    EXPECT_THROW(read_pgm(temp_path("missing.pgm")), std::runtime_error);

    Image bad;
    bad.height = 2;
    bad.width = 2;
    bad.pixels.resize(3);
    EXPECT_THROW(write_pgm(temp_path("bad.pgm"), bad), std::invalid_argument);
    bad.pixels.clear();
    bad.height = bad.width = 0;
    EXPECT_THROW(write_pgm(temp_path("empty.pgm"), bad), std::invalid_argument);
}

TEST(SignalCsv, RoundTripIsExactAndValidates) {
    SplitMix64 rng(72);
    std::vector<double> x = rng.normal_vector(20);
    x.push_back(1e300);
    x.push_back(5e-324);
    x.push_back(0.1);
    const std::string path = temp_path("signal.csv");
    write_signal_csv(path, x);
    EXPECT_EQ(read_signal_csv(path), x);

    const std::string bad = temp_path("signal-bad.csv");
    write_raw(bad, "1.5\nnot-a-number\n");
    EXPECT_THROW(read_signal_csv(bad), std::runtime_error);

    const std::string empty = temp_path("signal-empty.csv");
    write_raw(empty, "\n\n");
    EXPECT_THROW(read_signal_csv(empty), std::runtime_error);
}

TEST(FormatDouble, ShortestFormRoundTrips) {
    EXPECT_EQ(detail::format_double(0.1), "0.1");
    EXPECT_EQ(detail::format_double(1.0), "1");
    EXPECT_EQ(detail::format_double(-2.5), "-2.5");
    EXPECT_EQ(detail::format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(detail::format_double(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(detail::format_double(std::numeric_limits<double>::quiet_NaN()), "nan");

    SplitMix64 rng(73);
    for (int trial = 0; trial < 2000; ++trial) {
        const double mag = std::pow(10.0, 300.0 * (2.0 * rng.uniform01() - 1.0));
        const double v = (rng.uniform01() - 0.5) * mag;
        const std::string s = detail::format_double(v);
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    }
}

TEST(ConfigParse, AcceptsCommentsAndRejectsMalformedLines) {
    const Config cfg = Config::parse_string(
        "# leading comment\n"
        "\n"
        "solver.tau = 2.5\n"
        "  phantom.kind   =   piecewise   \n"
        "flag = true\n");
    EXPECT_EQ(cfg.get_double("solver.tau"), 2.5);
    EXPECT_EQ(cfg.get_string("phantom.kind"), "piecewise");
    EXPECT_TRUE(cfg.get_bool("flag"));
    EXPECT_FALSE(cfg.has("missing"));

    try {
        Config::parse_string("a = 1\nbroken line\n");
        FAIL() << "missing `=` must be rejected";
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("line 2"), std::string::npos);
        EXPECT_NE(what.find("expected `key = value`"), std::string::npos);
    }

    EXPECT_THROW(Config::parse_string("= 5\n"), ConfigError);
    EXPECT_THROW(Config::parse_string("a b = 5\n"), ConfigError);
    try {
        Config::parse_string("a = 1\na = 2\n");
        FAIL() << "duplicate keys must be rejected";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("duplicate key `a`"), std::string::npos);
    }
}

TEST(ConfigParse, TypedGettersValidate) {
    const Config cfg = Config::parse_string(
        "num = 1.5\nword = hello\ncount = 12\nneg = -3\nbig = 99999999999999999999\n"
        "yes = true\n");
    EXPECT_EQ(cfg.get_double("num"), 1.5);
    EXPECT_EQ(cfg.get_uint("count"), 12u);
    EXPECT_THROW(cfg.get_double("word"), ConfigError);
    EXPECT_THROW(cfg.get_uint("neg"), ConfigError);
    EXPECT_THROW(cfg.get_uint("num"), ConfigError);
    EXPECT_THROW(cfg.get_uint("big"), ConfigError);
    EXPECT_THROW(cfg.get_bool("word"), ConfigError);
    EXPECT_TRUE(cfg.get_bool("yes"));
    EXPECT_THROW(cfg.get_string("missing"), ConfigError);

    EXPECT_EQ(cfg.get_double_or("absent", 7.5), 7.5);
    EXPECT_EQ(cfg.get_uint_or("absent", 4u), 4u);
    EXPECT_EQ(cfg.get_string_or("absent", "fallback"), "fallback");
    EXPECT_TRUE(cfg.get_bool_or("absent", true));
}

TEST(ConfigParse, TracksUsedKeys) {
    const Config cfg = Config::parse_string("a = 1\nb = 2\nc = 3\n");
    cfg.get_double("b");
    cfg.mark_used("c");
    EXPECT_EQ(cfg.unused_keys(), std::vector<std::string>{"a"});
    try {
        cfg.require_all_used();
        FAIL() << "unused keys must be rejected";
    } catch (const ConfigError& e) {
        EXPECT_STREQ(e.what(), "unknown key `a`");
    }
    cfg.get_string("a");
    EXPECT_NO_THROW(cfg.require_all_used());
}

TEST(ConfigSerialize, CanonicalSortedFormAndFileRoundTrip) {
    Config cfg;
    cfg.set("zeta.key", "last");
    cfg.set_double("alpha.gamma", 0.1);
    cfg.set_uint("alpha.count", 42);
    cfg.set_bool("mid.flag", false);
    EXPECT_EQ(cfg.serialize(),
              "alpha.count = 42\n"
              "alpha.gamma = 0.1\n"
              "mid.flag = false\n"
              "zeta.key = last\n");

    const std::string path = temp_path("roundtrip.ini");
    cfg.write_file(path);
    const Config back = Config::parse_file(path);
    EXPECT_EQ(back.serialize(), cfg.serialize());

    EXPECT_THROW(Config::parse_file(temp_path("missing.ini")), ConfigError);
}

TEST(TraceCsv, GoldenLinesWithAndWithoutOptionalColumns) {
    ConvergenceTrace t;
    t.residual_sq = {2.0, 0.5};
    t.normalized_residual = {1.0, 0.25};
    t.objective = {3.0, 1.5};
    t.distance = {4.0, 2.0};
    t.wall_time_s = {0.125, 0.5}; // never exported
    EXPECT_EQ(trace_csv(t),
              "k,residual,normalized_residual,objective,distance,wall_time_s\n"
              "0,2,1,3,4,\n"
              "1,0.5,0.25,1.5,2,\n");

    t.objective.clear();
    t.distance.clear();
    EXPECT_EQ(trace_csv(t),
              "k,residual,normalized_residual,objective,distance,wall_time_s\n"
              "0,2,1,,,\n"
              "1,0.5,0.25,,,\n");
}

} // namespace
