// Copyright 2026 The lidarsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "lidarsim/core.hpp"

namespace lidarsim {
namespace {

SensorConfig small_config() {
  return SensorConfig("small", 4, 8, deg2rad(-15.0), deg2rad(15.0), deg2rad(-180.0),
                      deg2rad(180.0), 50.0);
}

TEST(RangeImageValidation, AllZeroIsValid) {
  EXPECT_TRUE(validate_range_image(RangeImage(small_config()), small_config()).empty());
}

TEST(RangeImageValidation, SingleReturnIsValid) {
  RangeImage ri(small_config());
  ri.depth(0, 0) = 5.0;
  ri.intensity(0, 0) = 0.2;
  EXPECT_TRUE(validate_range_image(ri, small_config()).empty());
}

TEST(RangeImageValidation, IntensityWithoutReturn) {
  RangeImage ri(small_config());
  ri.intensity(0, 0) = 0.5;
  const auto report = validate_range_image(ri, small_config());
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0], "intensity without return at (0,0)");
}

TEST(RangeImageValidation, ReportsEveryBreach) {
  RangeImage ri(small_config());
  ri.depth(1, 2) = 60.0;
  ri.depth(2, 3) = -1.0;
  ri.depth(3, 3) = 4.0;
  ri.intensity(3, 3) = 1.5;
  EXPECT_EQ(validate_range_image(ri, small_config()).size(), 3u);
  EXPECT_EQ(validate_range_image(RangeImage(3, 8), small_config()).size(), 1u);
}

TEST(SensorPreset, Waymo) {
  const SensorConfig s = sensor_preset("waymo64");
  EXPECT_EQ(s.rows, 64);
  EXPECT_NEAR(rad2deg(s.vfov()), 50.0, 1e-12);
  EXPECT_EQ(s.max_range, 75.0);
  EXPECT_NEAR(s.elev_max, -s.elev_min, 1e-15);
  EXPECT_TRUE(wraps(s));
}

TEST(SensorPreset, Kitti) {
  const SensorConfig s = sensor_preset("kitti64");
  EXPECT_EQ(s.rows, 64);
  EXPECT_NEAR(rad2deg(s.vfov()), 27.0, 1e-12);
  EXPECT_EQ(s.max_range, 80.0);
}

TEST(SensorPreset, UnknownNamesValidSet) {
  try {
    sensor_preset("hdl32");
    FAIL();
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("hdl32"), std::string::npos);
    EXPECT_NE(msg.find("waymo64"), std::string::npos);
    EXPECT_NE(msg.find("kitti64"), std::string::npos);
  }
}

TEST(SensorConfig, RejectsBadFields) {
  EXPECT_THROW(SensorConfig("x", 0, 8, -0.1, 0.1, -1, 1, 10), InvalidArgument);
  EXPECT_THROW(SensorConfig("x", 4, 0, -0.1, 0.1, -1, 1, 10), InvalidArgument);
  EXPECT_THROW(SensorConfig("x", 4, 8, 0.1, 0.1, -1, 1, 10), InvalidArgument);
  EXPECT_THROW(SensorConfig("x", 4, 8, -0.1, 0.1, 1, -1, 10), InvalidArgument);
  EXPECT_THROW(SensorConfig("x", 4, 8, -0.1, 0.1, 0, 7, 10), InvalidArgument);
  EXPECT_THROW(SensorConfig("x", 4, 8, -0.1, 0.1, -1, 1, 0), InvalidArgument);
  EXPECT_NO_THROW(SensorConfig("x", 4, 8, -0.1, 0.1, -kPi, kPi, 10));
}

TEST(SensorConfig, WrapOnlyForFullCircle) {
  EXPECT_TRUE(wraps(small_config()));
  EXPECT_FALSE(wraps(SensorConfig("x", 4, 8, -0.1, 0.1, -1, 1, 10)));
}

TEST(CameraModel, Defaults) {
  const CameraModel cam;
  EXPECT_EQ(cam.width, 512);
  EXPECT_EQ(cam.height, 256);
  EXPECT_EQ(cam.fx, 256.0);
  EXPECT_EQ(cam.fy, 256.0);
  EXPECT_EQ(cam.cx, 255.5);
  EXPECT_EQ(cam.cy, 127.5);
}

TEST(CameraModel, RejectsBadRotationAndFocal) {
  RigidTransform scaled;
  scaled.rotation[0][0] = 1.0 + 1e-6;
  EXPECT_THROW(CameraModel(64, 32, 10, 10, 32, 16, scaled), InvalidArgument);
  RigidTransform mirror;
  mirror.rotation[2][2] = -1.0;
  EXPECT_THROW(CameraModel(64, 32, 10, 10, 32, 16, mirror), InvalidArgument);
  EXPECT_THROW(CameraModel(64, 32, 0, 10, 32, 16, RigidTransform{}), InvalidArgument);
  EXPECT_THROW(CameraModel(64, 32, 10, -1, 32, 16, RigidTransform{}), InvalidArgument);
  EXPECT_NO_THROW(CameraModel(64, 32, 10, 10, 32, 16, RigidTransform{}));
}

TEST(RigidTransform, ForwardLookingAxes) {
  const RigidTransform t = forward_looking_extrinsic();
  EXPECT_EQ(t.apply({1, 0, 0}), (Vec3{0, 0, 1}));
  EXPECT_EQ(t.apply({0, -1, 0}), (Vec3{1, 0, 0}));
  EXPECT_EQ(t.apply({0, 0, -1}), (Vec3{0, 1, 0}));
}

TEST(RigidTransform, OriginInSource) {
  RigidTransform t = forward_looking_extrinsic();
  t.translation = {0.5, -0.25, 2.0};
  const Vec3 o = t.origin_in_source();
  const Vec3 back = t.apply(o);
  EXPECT_NEAR(back.x, 0.0, 1e-15);
  EXPECT_NEAR(back.y, 0.0, 1e-15);
  EXPECT_NEAR(back.z, 0.0, 1e-15);
  const Vec3 v{0.3, -0.7, 1.1};
  const Vec3 r = t.rotate_inverse(t.rotate(v));
  EXPECT_NEAR(r.x, v.x, 1e-15);
  EXPECT_NEAR(r.y, v.y, 1e-15);
  EXPECT_NEAR(r.z, v.z, 1e-15);
}

TEST(PointCloud, Validation) {
  EXPECT_NO_THROW(validate_pointcloud({{{1, 2, 3, 0.5}}}));
  EXPECT_THROW(validate_pointcloud({{{1, 2, 3, 1.5}}}), InvalidArgument);
  EXPECT_THROW(validate_pointcloud({{{std::nan(""), 2, 3, 0.5}}}), InvalidArgument);
}

TEST(AppearanceImage, MatchesCamera) {
  const CameraModel cam = CameraModel::centered(16, 8, 10.0);
  AppearanceImage img(8, 16);
  EXPECT_NO_THROW(validate_appearance(img, cam));
  img.channels[1](3, 4) = 1.2;
  EXPECT_THROW(validate_appearance(img, cam), InvalidArgument);
  EXPECT_THROW(validate_appearance(AppearanceImage(16, 8), cam), InvalidArgument);
}

TEST(PredictorOutput, RejectsOutOfRange) {
  GridD ok(2, 2, 0.5);
  GridD bad(2, 2, 0.5);
  bad(1, 1) = -0.1;
  EXPECT_NO_THROW(PredictorOutput(ok, ok));
  EXPECT_THROW(PredictorOutput(ok, bad), InvalidArgument);
  EXPECT_THROW(PredictorOutput(ok, GridD(2, 3)), InvalidArgument);
}

TEST(PredictorOutput, FromMask) {
  DenseIntensityMask m(1, 3);
  m.value(0, 1) = 0.4;
  m.depth(0, 1) = 7.0;
  const PredictorOutput p = prediction_from_mask(m);
  EXPECT_EQ(p.raydrop(0, 0), 0.0);
  EXPECT_EQ(p.raydrop(0, 1), 1.0);
  EXPECT_EQ(p.intensity(0, 1), 0.4);
}

TEST(Grid, BoundsCheckedAccess) {
  GridD g(2, 3);
  g.at(1, 2) = 4.0;
  EXPECT_EQ(g(1, 2), 4.0);
  EXPECT_THROW(g.at(2, 0), std::out_of_range);
  EXPECT_THROW(g.at(0, 3), std::out_of_range);
}

}  // namespace
}  // namespace lidarsim
