# Test package for the three-photon fringe simulator