#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "owod/geometry.hpp"

using owod::BBox;
using owod::iou;

namespace {

BBox random_box(std::mt19937& rng) {
    std::uniform_real_distribution<double> pos(0.0, 50.0);
    std::uniform_real_distribution<double> size(0.0, 20.0);
    const double x = pos(rng), y = pos(rng);
    return {x, y, x + size(rng), y + size(rng)};
}

}  // namespace

TEST_CASE("iou on fixed boxes") {
    CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0);
    CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == 0.0);
    // intersection 2, union 6
    CHECK_THAT(iou({0, 0, 2, 2}, {1, 0, 3, 2}),
               Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("iou degenerate boxes") {
    // zero-area union rule
    CHECK(iou({1, 1, 1, 1}, {1, 1, 1, 1}) == 0.0);
    CHECK(iou({0, 0, 0, 5}, {0, 0, 0, 5}) == 0.0);
    CHECK(iou({1, 1, 1, 1}, {0, 0, 2, 2}) == 0.0);
}

TEST_CASE("bbox coordinate conversion") {
    const BBox b = BBox::from_xywh(10, 20, 30, 40);
    CHECK(b == BBox{10, 20, 40, 60});
    CHECK(b.area() == 30.0 * 40.0);
}

TEST_CASE("iou properties over random boxes") {
    std::mt19937 rng(20240811);
    for (int i = 0; i < 2000; ++i) {
        const BBox a = random_box(rng);
        const BBox b = random_box(rng);

        const double v = iou(a, b);
        CHECK(v == iou(b, a));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);

        if (a.area() > 0.0) CHECK(iou(a, a) == 1.0);

        std::uniform_real_distribution<double> shift(-30.0, 30.0);
        const double dx = shift(rng), dy = shift(rng);
        CHECK_THAT(iou(a.translated(dx, dy), b.translated(dx, dy)),
                   Catch::Matchers::WithinAbs(v, 1e-9));
    }
}
