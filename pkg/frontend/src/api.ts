import type { Command, RuleInfoJson, SessionCreatedJson, SessionStateJson } from './types'

export class ApiError extends Error {
    constructor(public status: number, detail: string) {
        super(detail)
    }
}

async function asJson<T>(resp: Response): Promise<T> {
    if (!resp.ok) {
        let detail = resp.statusText
        try {
            const body = await resp.json()
            if (body && typeof body.detail === 'string') detail = body.detail
        } catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(resp.status, detail)
    }
    return resp.json() as Promise<T>
}

/** Thin typed client over the session endpoints. */
export class SessionApi {
    constructor(
        private base: string = '',
        private fetcher: typeof fetch = fetch.bind(globalThis),
    ) {}

    listRules(): Promise<RuleInfoJson[]> {
        return this.fetcher(`${this.base}/rules`).then((r) => asJson<RuleInfoJson[]>(r))
    }

    createSession(ruleId: string, kInit: number, seed = 0): Promise<SessionCreatedJson> {
        return this.fetcher(`${this.base}/sessions`, {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: JSON.stringify({ rule_id: ruleId, k_init: kInit, seed }),
        }).then((r) => asJson<SessionCreatedJson>(r))
    }

    getState(sessionId: string): Promise<SessionStateJson> {
        return this.fetcher(`${this.base}/sessions/${sessionId}/state`).then((r) =>
            asJson<SessionStateJson>(r),
        )
    }

    sendCommand(sessionId: string, command: Command): Promise<SessionStateJson> {
        return this.fetcher(`${this.base}/sessions/${sessionId}/command`, {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: JSON.stringify(command),
        }).then((r) => asJson<SessionStateJson>(r))
    }
}
