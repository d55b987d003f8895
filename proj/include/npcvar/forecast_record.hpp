#pragma once

#include <string>

namespace npcvar {

// One one-step-ahead cVaR forecast paired with its realisation.
struct ForecastRecord {
  long index = 0;          // time index of the realised observation
  std::string date;        // label when the series carries timestamps
  double level = 0.0;      // VaR level alpha
  double forecast = 0.0;   // NaN when error is set
  double realized = 0.0;
  bool hit = false;        // realised loss exceeded the forecast
  bool error = false;      // the window fit failed; record excluded downstream
};

}  // namespace npcvar
