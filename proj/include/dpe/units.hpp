#pragma once

namespace dpe {

// SI units throughout: volts, amperes, siemens, ohms, joules, seconds.
using Voltage = double;
using Current = double;
using Conductance = double;
using Resistance = double;
using Energy = double;
using Time = double;

}  // namespace dpe
