"""Physical constants and numerical guards shared across modules."""

SPEED_OF_LIGHT = 299792458.0
"Speed of light in vacuum, m/s."

R_MIN = 1.0
"Near-field guard in metres; the far-field radar equation is not used closer than this."

ENDFIRE_COS_TOL = 1e-12
"|cos(theta)| at or below this is treated as exact endfire (no angle information)."

SINGULAR_COND = 1e12
"Condition numbers above this mark a Fisher matrix as singular."
