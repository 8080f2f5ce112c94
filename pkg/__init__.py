# Cooperative Spectrum Sensing
# Energy detection, hard-decision fusion and SPRT under SSDF attack
