"""nodallab module."""
