#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "sassseg/image_io.hpp"
#include "sassseg/metrics.hpp"
#include "sassseg/pipeline.hpp"
#include "sassseg/thresholding.hpp"
#include "test_support.hpp"

using namespace sass;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
}

std::vector<ManifestEntry> fake_entries(std::size_t n) {
    std::vector<ManifestEntry> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i].image_path = "img_" + std::to_string(i) + ".png";
    return v;
}

std::array<std::size_t, 3> split_counts(const std::vector<ManifestEntry>& v) {
    std::array<std::size_t, 3> c{};
    for (const auto& e : v) {
        if (e.split == Split::Train) ++c[0];
        if (e.split == Split::Val) ++c[1];
        if (e.split == Split::Test) ++c[2];
    }
    return c;
}

AugmentSpec no_augment(int w = 0, int h = 0) {
    AugmentSpec s;
    s.resize_w = w;
    s.resize_h = h;
    s.hflip_p = 0.0;
    s.vflip_p = 0.0;
    s.brightness_delta = 0.0;
    s.contrast_lo = 1.0;
    s.contrast_hi = 1.0;
    return s;
}

}  // namespace

TEST(Manifest, EmptyFileGivesEmptyList) {
    test::TempDir dir;
    write_text(dir / "m.csv", "");
    EXPECT_TRUE(load_manifest(dir / "m.csv").empty());
}

TEST(Manifest, MissingFileThrows) {
    test::TempDir dir;
    EXPECT_THROW(load_manifest(dir / "nope.csv"), std::runtime_error);
}

TEST(Manifest, RowsInFileOrderWithRelativePaths) {
    test::TempDir dir;
    for (const char* n : {"a.png", "b.png", "c.png", "am.png"}) write_gray(dir / n, GrayImage(2, 2));
    write_text(dir / "m.csv", "image,mask,split\nc.png,,train\na.png,am.png,val\nb.png,,\n");
    const auto v = load_manifest(dir / "m.csv");
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[0].image_path, dir / "c.png");
    EXPECT_FALSE(v[0].mask_path.has_value());
    EXPECT_EQ(v[0].split, Split::Train);
    EXPECT_EQ(v[1].image_path, dir / "a.png");
    EXPECT_EQ(*v[1].mask_path, dir / "am.png");
    EXPECT_EQ(v[1].split, Split::Val);
    EXPECT_EQ(v[2].split, Split::Unassigned);
}

TEST(Manifest, DanglingImageNamesRow) {
    test::TempDir dir;
    write_gray(dir / "a.png", GrayImage(2, 2));
    write_text(dir / "m.csv", "image,mask,split\na.png,,train\nghost.png,,train\n");
    try {
        load_manifest(dir / "m.csv");
        FAIL();
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("ghost.png"), std::string::npos) << msg;
    }
}

TEST(Manifest, MalformedRowAndHeader) {
    test::TempDir dir;
    write_gray(dir / "a.png", GrayImage(2, 2));
    write_text(dir / "m.csv", "image,mask,split\na.png,train\n");
    EXPECT_THROW(load_manifest(dir / "m.csv"), std::runtime_error);
    write_text(dir / "m.csv", "img,mask,split\na.png,,train\n");
    EXPECT_THROW(load_manifest(dir / "m.csv"), std::runtime_error);
    write_text(dir / "m.csv", "image,mask,split\na.png,,holdout\n");
    EXPECT_THROW(load_manifest(dir / "m.csv"), std::runtime_error);
}

TEST(Manifest, InvertColumn) {
    test::TempDir dir;
    write_gray(dir / "a.png", GrayImage(2, 2));
    write_text(dir / "m.csv", "image,mask,split,invert\na.png,,train,1\na.png,,test,0\n");
    const auto v = load_manifest(dir / "m.csv");
    EXPECT_TRUE(v[0].invert);
    EXPECT_FALSE(v[1].invert);
}

TEST(Manifest, WriteThenLoadRoundTrips) {
    test::TempDir dir;
    const auto samples = synth_blobs(4, 16, 16, 3);
    const auto manifest = write_synth_dataset(dir.path(), samples, {Split::Train, Split::Val, Split::Test, Split::Train});
    auto v = load_manifest(manifest);
    ASSERT_EQ(v.size(), 4u);
    v[2].invert = true;
    write_manifest(dir / "again.csv", v);
    EXPECT_EQ(load_manifest(dir / "again.csv"), v);
}

TEST(Splits, FloorFloorRemainder) {
    for (std::size_t n : {2376u, 10u, 0u, 1u, 7u, 333u}) {
        const auto c = split_counts(make_splits(fake_entries(n), {}, 1));
        const auto train = static_cast<std::size_t>(std::floor(0.7 * static_cast<double>(n) + 1e-9));
        const auto val = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(n) + 1e-9));
        EXPECT_EQ(c[0], train) << n;
        EXPECT_EQ(c[1], val) << n;
        EXPECT_EQ(c[2], n - train - val) << n;
    }
    EXPECT_EQ(split_counts(make_splits(fake_entries(2376), {}, 1)), (std::array<std::size_t, 3>{1663, 237, 476}));
    EXPECT_EQ(split_counts(make_splits(fake_entries(10), {}, 1)), (std::array<std::size_t, 3>{7, 1, 2}));
}

TEST(Splits, DeterministicPerSeedAndPartition) {
    const auto a = make_splits(fake_entries(100), {}, 5);
    const auto b = make_splits(fake_entries(100), {}, 5);
    const auto c = make_splits(fake_entries(100), {}, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].image_path, fake_entries(100)[i].image_path);
        EXPECT_NE(a[i].split, Split::Unassigned);
    }
    const auto train = filter_split(a, Split::Train);
    const auto val = filter_split(a, Split::Val);
    const auto test_split = filter_split(a, Split::Test);
    EXPECT_EQ(train.size() + val.size() + test_split.size(), 100u);
    std::set<std::filesystem::path> seen;
    for (const auto* part : {&train, &val, &test_split}) {
        for (const auto& e : *part) EXPECT_TRUE(seen.insert(e.image_path).second);
    }
}

TEST(Splits, RatiosMustSumToOne) {
    EXPECT_THROW(make_splits(fake_entries(5), {0.7, 0.1, 0.1}, 1), std::invalid_argument);
    EXPECT_NO_THROW(make_splits(fake_entries(5), {0.5, 0.25, 0.25}, 1));
}

TEST(Augment, DisabledMeansResizeOnly) {
    Rng rng(101);
    const GrayImage img = test::random_gray(rng, 20, 12);
    const BinaryMask m = test::random_mask(rng, 20, 12);
    const auto a = augment(img, m, no_augment(10, 6), 3);
    EXPECT_EQ(a.image, resize_bilinear(img, 10, 6));
    EXPECT_EQ(*a.mask, resize_nearest(m, 10, 6));
}

TEST(Augment, BrightnessOnConstantImage) { EXPECT_EQ(apply_photometric(GrayImage(4, 4, 100), 10.0, 1.0), GrayImage(4, 4, 110)); }

TEST(Augment, PhotometricClamps) {
    EXPECT_EQ(apply_photometric(GrayImage(1, 1, 250), 20.0, 1.0).data[0], 255);
    EXPECT_EQ(apply_photometric(GrayImage(1, 1, 5), -20.0, 1.0).data[0], 0);
}

TEST(Augment, HflipKeepsMaskAligned) {
    Rng rng(102);
    const GrayImage img = test::random_gray(rng, 16, 16);
    const BinaryMask m = test::random_mask(rng, 16, 16);
    AugmentSpec s = no_augment();
    s.hflip_p = 1.0;
    const auto a = augment(img, m, s, 0);
    EXPECT_EQ(a.image, flip_horizontal(img));
    EXPECT_EQ(*a.mask, flip_horizontal(m));
    EXPECT_EQ(a.mask->count_foreground(), m.count_foreground());
}

TEST(Augment, GeometryMatchesOnImageEqualTo255TimesMask) {
    Rng rng(103);
    for (std::uint64_t key = 0; key < 100; ++key) {
        const BinaryMask m = test::random_mask(rng, 24, 18);
        GrayImage img(24, 18);
        for (std::size_t i = 0; i < m.size(); ++i) img.data[i] = m.data[i] ? 255 : 0;
        AugmentSpec s;  // default flip probabilities, photometric off
        s.brightness_delta = 0.0;
        s.contrast_lo = s.contrast_hi = 1.0;
        s.seed = 9;
        const auto a = augment(img, m, s, key);
        for (std::size_t i = 0; i < m.size(); ++i) ASSERT_EQ(a.image.data[i], a.mask->data[i] ? 255 : 0);
    }
}

TEST(Augment, DeterministicPerKey) {
    Rng rng(104);
    const GrayImage img = test::random_gray(rng, 16, 16);
    AugmentSpec s;
    s.seed = 3;
    EXPECT_EQ(augment(img, std::nullopt, s, 11).image, augment(img, std::nullopt, s, 11).image);
    bool differs = false;
    for (std::uint64_t k = 0; k < 10 && !differs; ++k) {
        differs = augment(img, std::nullopt, s, k).image != augment(img, std::nullopt, s, k + 100).image;
    }
    EXPECT_TRUE(differs);
}

TEST(Augment, RejectsInvalidSpec) {
    AugmentSpec s;
    s.hflip_p = 1.5;
    EXPECT_THROW(augment(GrayImage(2, 2), std::nullopt, s, 0), std::invalid_argument);
    s = AugmentSpec{};
    s.contrast_lo = 0.0;
    EXPECT_THROW(augment(GrayImage(2, 2), std::nullopt, s, 0), std::invalid_argument);
}

TEST(Synth, SameSeedBitIdentical) {
    const auto a = synth_blobs(5, 32, 32, 4);
    const auto b = synth_blobs(5, 32, 32, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].image, b[i].image);
        EXPECT_EQ(a[i].mask, b[i].mask);
    }
    const auto one = synth_blob(4, 3, 32, 32);
    EXPECT_EQ(one.mask, a[3].mask);
}

TEST(Synth, RejectsTinyImages) { EXPECT_THROW(synth_blob(1, 0, 15, 32), std::invalid_argument); }

TEST(Synth, ForegroundFractionBounds) {
    const auto v = synth_blobs(1000, 64, 64, 1);
    for (const auto& s : v) {
        const double f = static_cast<double>(s.mask.count_foreground()) / static_cast<double>(s.mask.size());
        ASSERT_GT(f, 0.01);
        ASSERT_LT(f, 0.6);
    }
}

TEST(Synth, OtsuPseudoMasksTrackGroundTruth) {
    const auto v = synth_blobs(200, 64, 64, 2);
    double sum = 0.0;
    for (const auto& s : v) sum += iou(generate_pseudo_mask(s.image, ThresholdMethod{}).mask, s.mask);
    // Measured mean 0.99999 at the default noise level.
    EXPECT_GT(sum / 200.0, 0.99);
}

TEST(Synth, MaterializeWritesPairsAndManifest) {
    test::TempDir dir;
    const auto samples = synth_blobs(3, 16, 16, 8);
    const auto manifest = write_synth_dataset(dir.path(), samples, {});
    EXPECT_TRUE(std::filesystem::exists(dir / "img_00002.png"));
    EXPECT_TRUE(std::filesystem::exists(dir / "msk_00002.png"));
    const auto entries = load_manifest(manifest);
    ASSERT_EQ(entries.size(), 3u);
    EXPECT_EQ(read_gray(entries[1].image_path), samples[1].image);
    EXPECT_EQ(read_mask(*entries[1].mask_path), samples[1].mask);
}

TEST(Dataset, MaskPolicies) {
    test::TempDir dir;
    const auto samples = synth_blobs(2, 32, 32, 8);
    auto entries = load_manifest(write_synth_dataset(dir.path(), samples, {}));
    const Dataset skip = load_dataset(entries, 16, 16, MaskPolicy::Skip);
    EXPECT_FALSE(skip.masks[0].has_value());
    EXPECT_EQ(skip.images[0].width, 16);
    const Dataset with = load_dataset(entries, 32, 32, MaskPolicy::Require);
    EXPECT_EQ(*with.masks[1], samples[1].mask);
    entries[1].mask_path.reset();
    try {
        load_dataset(entries, 16, 16, MaskPolicy::Require);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("img_00001.png"), std::string::npos);
    }
}
