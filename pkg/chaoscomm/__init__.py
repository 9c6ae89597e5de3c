# -*- coding: utf-8 -*-
"""
chaoscomm: chaos-based anytime-reliable coded modulation over the AWGN channel.
"""

__version__ = '0.1.0'
