// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "subthz/errors.hpp"
#include "subthz/units.hpp"

using namespace subthz;

TEST(Units, DbmVoltsOneOhm) {
  // 0 dBm = 1 mW -> sqrt(1e-3) V across 1 ohm
  EXPECT_NEAR(dbm_to_volts(0.0), std::sqrt(1e-3), 1e-15);
  EXPECT_NEAR(volts_to_dbm(0.0559), 20.0 * std::log10(0.0559) + 30.0, 1e-12);
  EXPECT_NEAR(volts_to_dbm(dbm_to_volts(-23.7)), -23.7, 1e-12);
}

TEST(Units, FiftyOhmIsAConfigurableConstant) {
  EXPECT_NEAR(volts_to_dbm(1.0, 50.0), 10.0 * std::log10(1.0 / 50.0) + 30.0, 1e-12);
  EXPECT_NEAR(dbm_to_volts(volts_to_dbm(0.3, 50.0), 50.0), 0.3, 1e-14);
}

TEST(Units, DegreesRadians) {
  EXPECT_DOUBLE_EQ(deg_to_rad(180.0), M_PI);
  EXPECT_DOUBLE_EQ(rad_to_deg(M_PI / 2), 90.0);
}

TEST(Units, WattsDbm) {
  EXPECT_DOUBLE_EQ(watts_to_dbm(1e-3), 0.0);
  EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
  EXPECT_NEAR(db_to_linear_power(10.0), 10.0, 1e-14);
  EXPECT_NEAR(linear_power_to_db(100.0), 20.0, 1e-14);
}

TEST(Errors, ExitCodes) {
  EXPECT_EQ(exit_code(ConfigError("x").kind()), 2);
  EXPECT_EQ(exit_code(DataError("x").kind()), 3);
  EXPECT_EQ(exit_code(RangeError("x", 1.0).kind()), 3);
  EXPECT_EQ(exit_code(NumericalError("x").kind()), 4);
  EXPECT_DOUBLE_EQ(RangeError("x", -40.0).bound(), -40.0);
  EXPECT_EQ(ParseError("x", 7).line(), 7u);
}
