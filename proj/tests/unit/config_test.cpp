/*
 * Copyright 2026 The dvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dvs/config.hpp"

#include <gtest/gtest.h>

#include "dvs/error.hpp"
#include "dvs/io.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace {

using json = nlohmann::json;

TEST(Config, Defaults) {
  const dvs::PipelineConfig c;
  EXPECT_EQ(c.matching.min_clips, 20u);
  EXPECT_EQ(c.matching.softmax_scale, 100.0);
  EXPECT_EQ(c.matching.frame_agg, dvs::FrameAggregation::kMean);
  EXPECT_EQ(c.matching.frames_per_clip, 3u);
  EXPECT_FALSE(c.matching.keep_singleton_classes);
  EXPECT_EQ(c.fusion.label_dim, 128u);
  const auto j = dvs::config_to_json(c);
  EXPECT_EQ(j.at("matching").at("frame_agg"), "mean");
  EXPECT_TRUE(j.at("llm").at("replay_dir").is_null());
}

TEST(Config, JsonRoundTrip) {
  dvs::PipelineConfig c;
  c.llm.model = "m";
  c.llm.replay_dir = "replay";
  c.llm.seed = 3;
  c.matching.min_clips = 5;
  c.matching.frame_agg = dvs::FrameAggregation::kMax;
  c.matching.keep_singleton_classes = true;
  c.fusion.seed = 99;
  c.paths.reports = "out";
  const auto back = dvs::config_from_json(json::parse(dvs::config_to_json(c).dump()));
  EXPECT_EQ(dvs::config_to_json(back), dvs::config_to_json(c));
}

TEST(Config, PartialOverridesKeepDefaults) {
  const auto c = dvs::config_from_json(json::parse(R"({"matching": {"min_clips": 7}})"));
  EXPECT_EQ(c.matching.min_clips, 7u);
  EXPECT_EQ(c.matching.softmax_scale, 100.0);
  EXPECT_EQ(c.llm.model, "gpt-4");
}

TEST(Config, Rejections) {
  for (const char* bad : {R"({"matching": {"min_clips": 0}})", R"({"matching": {"softmax_scale": -1}})",
                          R"({"fusion": {"label_dim": 0}})", R"({"matching": {"frame_agg": "median"}})",
                          R"({"llm": {"api_key": "sk-123"}})", R"({"extra": 1})"}) {
    EXPECT_THROW(dvs::config_from_json(json::parse(bad)), dvs::ValidationError) << bad;
  }
  EXPECT_THROW(dvs::config_from_json(json::parse(R"({"matching": {"min_clips": "x"}})")), dvs::ParseError);
  EXPECT_THROW(dvs::config_from_json(json::parse(R"({"matching": {"threads": -2}})")), dvs::Error);
}

TEST(Config, LoadFile) {
  dvs::testing::TempDir dir;
  dvs::write_file_atomic(dir / "c.json", R"({"fusion": {"label_dim": 64}})");
  EXPECT_EQ(dvs::load_config(dir / "c.json").fusion.label_dim, 64u);
  dvs::write_file_atomic(dir / "bad.json", "{");
  EXPECT_THROW(dvs::load_config(dir / "bad.json"), dvs::ParseError);
  EXPECT_THROW(dvs::load_config(dir / "none.json"), dvs::IoError);
}

}  // namespace
