import abc
import logging

import numpy as np

from chaoscomm.chaotic_maps import MapKind, MapModel
from chaoscomm.codec import adaptive_bandwidth, adaptive_size
from chaoscomm.codec.adaptive_bandwidth import BwDecoderState, BwEncoderState, RefTrajectories
from chaoscomm.codec.adaptive_size import SizeDecoderState, SizeEncoderState
from chaoscomm.common.exceptions import InvalidParameterError


class SchemeStrategy(abc.ABC):
    """Modulation scheme strategy abstract class"""

    def __init__(self, map_model: MapModel):
        self.logger = logging.getLogger(__name__)
        self.map = map_model

    @abc.abstractmethod
    def new_encoder(self):
        """
        Create a fresh transmitter state for one block

        Returns:
            encoder state exposing encode_step(bit | None), q, n and discard(count)
        """
        pass

    @abc.abstractmethod
    def new_decoder(self, sigma2: float, pe_res: float):
        """
        Create a fresh receiver state for one block

        Parameters:
            sigma2: noise variance per real dimension
            pe_res: residual error floor used by the release rule

        Returns:
            decoder state exposing update(r, extend), llr, epsilon, q and decided
        """
        pass

    @abc.abstractmethod
    def prune(self, dec, enc):
        """
        Release the reliable prefix and feed it back to the encoder

        Returns:
            (released bits, new epsilon)
        """
        pass

    @staticmethod
    def energy(symbol) -> float:
        """
        Energy of one transmitted symbol or vector

        Parameters:
            symbol: real scalar (adaptive-size) or vector (adaptive-bandwidth)
        """
        s = np.asarray(symbol, dtype=float)
        return float(np.dot(s.ravel(), s.ravel()))

    @abc.abstractmethod
    def nominal_energy(self, enc):
        """
        Mean energy of the symbols the encoder could send in its current state,
        with every pending bit equally likely 0 or 1
        """
        pass


class SizeSchemeStrategy(SchemeStrategy):
    """Adaptive-size strategy implementation"""

    def __init__(self, map_model: MapModel, gamma0: float, q_max: int, equal_power: bool = False):
        super().__init__(map_model)
        self.gamma0 = gamma0
        self.q_max = q_max
        self.equal_power = equal_power

    def new_encoder(self):
        return SizeEncoderState(self.map, gamma0=self.gamma0, q_max=self.q_max, equal_power=self.equal_power)

    def new_decoder(self, sigma2, pe_res):
        return SizeDecoderState(self.map, sigma2, gamma0=self.gamma0, pe_res=pe_res, equal_power=self.equal_power)

    def prune(self, dec, enc):
        return adaptive_size.reliability_prune(dec, enc)

    def nominal_energy(self, enc):
        return adaptive_size.symbol_energy(self.map, self.gamma0, enc.q, self.equal_power)


class BandwidthSchemeStrategy(SchemeStrategy):
    """Adaptive-bandwidth strategy implementation"""

    def __init__(self, ref: RefTrajectories):
        super().__init__(ref.map)
        self.ref = ref

    def new_encoder(self):
        return BwEncoderState(self.ref)

    def new_decoder(self, sigma2, pe_res):
        return BwDecoderState(self.ref, sigma2, pe_res=pe_res)

    def prune(self, dec, enc):
        return adaptive_bandwidth.reliability_prune(dec, enc)

    def nominal_energy(self, enc):
        return float(np.sum(self.ref.mean_power[enc.ages]))


class SchemeFactory:
    """Scheme factory class"""

    @staticmethod
    def create_scheme(scheme: str, map_name: str, eval_width: int, gamma0: float = None, q_max: int = None,
                      trajectory_len: int = None, m_r: int = None, normalized: bool = True,
                      rng: np.random.Generator = None, equal_power: bool = False) -> SchemeStrategy:
        """
        Create a scheme strategy based on the scheme name

        Parameters:
            scheme: 'size' or 'bw'
            map_name: 'bsm', 'tent' or 'logistic'
            eval_width: W, bits used when evaluating the mapper
            gamma0, q_max: adaptive-size parameters
            trajectory_len, m_r, normalized, rng: adaptive-bandwidth parameters, rng draws u0
            equal_power: adaptive-size, give a non-uniform map the symbol power of a uniform one

        Returns:
            scheme strategy instance
        """
        logger = logging.getLogger(__name__)
        map_model = MapModel(MapKind.from_name(map_name), eval_width)
        scheme = (scheme or '').strip().lower()
        if scheme == 'size':
            logger.debug(f"Create adaptive-size scheme: map={map_name}, gamma0={gamma0}, q_max={q_max}, "
                         f"equal_power={equal_power}")
            return SizeSchemeStrategy(map_model, gamma0, q_max, equal_power=equal_power)
        elif scheme == 'bw':
            logger.debug(f"Create adaptive-bandwidth scheme: map={map_name}, N={trajectory_len}, m_r={m_r}")
            ref = adaptive_bandwidth.gen_initial_conditions(map_model, trajectory_len, m_r, rng,
                                                            normalized=normalized)
            return BandwidthSchemeStrategy(ref)
        else:
            raise InvalidParameterError(f"Unsupported scheme: {scheme}")
